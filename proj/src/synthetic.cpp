#include "clustab/synthetic.hpp"

#include <cmath>
#include <limits>

#include "clustab/error.hpp"
#include "clustab/rng.hpp"

namespace clustab::synthetic {

LabeledData gaussian_blobs(std::size_t n, const RowMatrix& centers, double sigma, std::uint64_t seed) {
  if (centers.rows == 0 || n < centers.rows) {
    throw Error(ErrorCode::InvalidArgument, "need at least one item per blob");
  }
  const std::size_t d = centers.cols;
  Rng rng(seed);
  std::vector<double> values(n * d);
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = i % centers.rows;
    labels[i] = static_cast<Label>(b);
    for (std::size_t m = 0; m < d; ++m) values[i * d + m] = centers(b, m) + sigma * rng.normal();
  }
  auto data = EmbeddingMatrix::with_index_ids(std::move(values), n, d);
  Partition truth(data.shared_ids(), std::move(labels), centers.rows);
  return {std::move(data), std::move(truth)};
}

LabeledData separated_blobs(std::size_t n, std::size_t d, std::size_t blobs, double separation,
                            double sigma, std::uint64_t seed) {
  if (blobs == 0) throw Error(ErrorCode::InvalidArgument, "separated_blobs needs at least one blob");
  // Random Gaussian directions, rescaled so the closest pair sits exactly
  // `separation` sigmas apart. The gap is spread over every axis, so any
  // large subset of dimensions still separates the blobs.
  Rng rng(derive_seed(seed, 0x5eed));
  RowMatrix centers(blobs, d);
  for (auto& v : centers.data) v = rng.normal();
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < blobs; ++a) {
    for (std::size_t b = a + 1; b < blobs; ++b) {
      double s = 0.0;
      for (std::size_t m = 0; m < d; ++m) s += (centers(a, m) - centers(b, m)) * (centers(a, m) - centers(b, m));
      closest = std::min(closest, std::sqrt(s));
    }
  }
  if (blobs > 1) {
    if (!(closest > 0.0)) throw Error(ErrorCode::InvalidArgument, "degenerate blob centers");
    for (auto& v : centers.data) v *= separation * sigma / closest;
  } else {
    std::fill(centers.data.begin(), centers.data.end(), 0.0);
  }
  return gaussian_blobs(n, centers, sigma, seed);
}

LabeledData nested_blobs(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "nested_blobs needs d >= 2");
  RowMatrix centers(4, d);
  const double super_offset = 20.0;
  const double sub_offset = 6.0;
  for (std::size_t b = 0; b < 4; ++b) {
    centers(b, 0) = b < 2 ? -super_offset : super_offset;
    centers(b, 1) = b % 2 == 0 ? -sub_offset : sub_offset;
  }
  return gaussian_blobs(n, centers, 1.0, seed);
}

EmbeddingMatrix noise(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> values(n * d);
  for (auto& v : values) v = rng.normal();
  return EmbeddingMatrix::with_index_ids(std::move(values), n, d);
}

}  // namespace clustab::synthetic

namespace clustab::synthetic {

std::vector<std::string> bios(const Partition& truth, std::uint64_t seed) {
  static const std::vector<std::vector<std::string>> vocab = {
      {"patriot", "freedom", "maga", "veteran", "faith", "usa"},
      {"resist", "equality", "climate", "democrat", "justice", "vote"},
      {"gamer", "streamer", "anime", "twitch", "esports", "memes"},
      {"runner", "coffee", "yoga", "travel", "photography", "hiking"},
      {"crypto", "bitcoin", "investor", "founder", "startup", "web3"},
      {"teacher", "mom", "books", "gardening", "baking", "church"},
  };
  static const std::vector<std::string> filler = {"I", "love", "the", "and", "of", "my", "life", "proud"};
  Rng rng(seed);
  std::vector<std::string> out;
  out.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& words = vocab[truth.label(i) % vocab.size()];
    std::string bio;
    for (int w = 0; w < 7; ++w) {
      const bool own = rng.uniform() < 0.7;
      const auto& pool = own ? words : filler;
      if (!bio.empty()) bio += w == 3 ? ", " : " ";
      bio += pool[rng.index(pool.size())];
    }
    out.push_back(bio + ".");
  }
  return out;
}

}  // namespace clustab::synthetic
