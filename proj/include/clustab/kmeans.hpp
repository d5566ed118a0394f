#pragma once

#include <cstddef>
#include <vector>

#include "clustab/embedding.hpp"
#include "clustab/matrix.hpp"
#include "clustab/partition.hpp"
#include "clustab/rng.hpp"

namespace clustab::kmeans {

/// k-means++ seeding: first center uniform, then each next center drawn with
/// probability proportional to squared distance from the nearest chosen one.
RowMatrix seed_plus_plus(const EmbeddingMatrix& data, std::size_t k, Rng& rng);

/// Nearest center per row; lowest center index wins ties.
std::vector<Label> assign(const EmbeddingMatrix& data, const RowMatrix& centers);

/// Seeding followed by at most `max_lloyd` Lloyd iterations. Returns the
/// final assignment. Empty clusters keep their previous center.
std::vector<Label> cluster(const EmbeddingMatrix& data, std::size_t k, Rng& rng,
                           std::size_t max_lloyd = 10);

}  // namespace clustab::kmeans
