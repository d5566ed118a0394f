#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace clustab {

/// One SplitMix64 step; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream `stream` of `master`, i.e. splitmix64(master ^ stream).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Seeded generator whose output sequence is fixed across standard library
/// implementations: mt19937_64 is specified bit-for-bit, and the
/// distributions below are implemented here rather than taken from <random>.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound). bound must be positive.
  std::size_t index(std::size_t bound);

  double normal();

  /// `count` distinct indices from [0, population), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t population,
                                                      std::size_t count);

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace clustab
