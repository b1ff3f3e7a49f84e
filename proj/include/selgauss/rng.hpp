#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "selgauss/errors.hpp"
#include "selgauss/normal.hpp"

namespace selgauss {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Stable sub-stream derivation so replicates/chains get independent seeds
// that are reproducible from one base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(0x6A09E667F3BCC909ull + stream));
}

// mt19937_64 with explicit output mappings. std::*_distribution is
// implementation-defined, so uniforms and normals are produced by hand to
// keep runs bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Strictly inside (0,1): 53 random bits offset by half an ulp.
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return norm_quantile(uniform()); }

  std::uint64_t raw() { return eng_(); }

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::min<std::size_t>(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }

 private:
  std::mt19937_64 eng_;
};

// Fixed-capacity reproducible uniform stream for common-random-number
// likelihood evaluations: every evaluation rewinds to the same values, making
// Monte Carlo objectives deterministic and smooth in the parameters.
class UniformStream {
 public:
  UniformStream(std::uint64_t seed, std::size_t capacity)
      : seed_(seed), capacity_(capacity), rng_(seed) {}

  double next() {
    if (pos_ >= capacity_) throw NumericalError("uniform stream exhausted");
    ++pos_;
    return rng_.uniform();
  }

  void reset() {
    rng_ = Rng(seed_);
    pos_ = 0;
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t position() const { return pos_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::size_t capacity_;
  std::size_t pos_ = 0;
  Rng rng_;
};

}  // namespace selgauss
