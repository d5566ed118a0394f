#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "clustab/embedding.hpp"
#include "clustab/matrix.hpp"
#include "clustab/partition.hpp"

// Gaussian test fixtures with known generating labels.

namespace clustab::synthetic {

struct LabeledData {
  EmbeddingMatrix data;
  Partition truth;
};

/// Item i belongs to blob i % centers.rows; isotropic noise of std `sigma`.
LabeledData gaussian_blobs(std::size_t n, const RowMatrix& centers, double sigma, std::uint64_t seed);

/// `blobs` centers in random directions; the closest pair is exactly
/// separation * sigma apart.
LabeledData separated_blobs(std::size_t n, std::size_t d, std::size_t blobs, double separation,
                            double sigma, std::uint64_t seed);

/// Two well-separated super-blobs, each holding two closer sub-blobs. truth
/// labels the four sub-blobs; sub-blobs 0,1 form super-blob 0.
LabeledData nested_blobs(std::size_t n, std::size_t d, std::uint64_t seed);

/// Short bios drawn from a per-cluster vocabulary plus shared filler words,
/// aligned with `truth`.
std::vector<std::string> bios(const Partition& truth, std::uint64_t seed);

/// Unstructured standard normal data.
EmbeddingMatrix noise(std::size_t n, std::size_t d, std::uint64_t seed);

}  // namespace clustab::synthetic
