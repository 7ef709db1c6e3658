#pragma once

// Seeded randomness with bit-reproducible output across standard libraries.
// std::mt19937_64 has a fully specified output sequence; the distributions in
// <random> do not, so normal and bounded-integer draws are done here.

#include <cstdint>
#include <random>
#include <vector>

namespace privproj {

/// splitmix64 finalizer; used to derive per-iteration and per-cell seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Chained mix of a base seed with further keys.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound), rejection sampled (no modulo bias).
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via the Marsaglia polar method.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// `count` distinct indices drawn uniformly from [0, n), returned ascending.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, Rng& rng);

}  // namespace privproj
