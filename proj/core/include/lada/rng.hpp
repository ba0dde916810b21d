#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lada/error.hpp"

namespace lada {

/// Seeded random stream with hand-rolled distribution transforms.
///
/// The mt19937_64 engine is fully specified by the standard, and every
/// transform below is written out explicitly, so a given seed produces the
/// same draw sequence on any platform. Streams for different purposes are
/// derived with fork() from the original seed, independent of how many
/// draws the parent has consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    if (n == 0) throw DomainError("Rng::index: n must be positive");
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller (two uniforms per draw).
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape > 0.
  double gamma(double shape);

  /// Beta(a, b) as Ga/(Ga+Gb); a, b > 0.
  double beta(double a, double b);

  /// Child stream derived from the original seed and a stream id.
  Rng fork(std::uint64_t stream) const;

  /// In-place Fisher-Yates shuffle driven by this stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Uniformly random permutation of {0, .., n-1}.
  std::vector<std::size_t> permutation(std::size_t n);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer; used for seed mixing and content hashing.
std::uint64_t mix64(std::uint64_t x);

}  // namespace lada
