#pragma once

#include "dayvec/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

namespace dayvec {

// All randomness in the library flows through Rng. The draw algorithms are
// fixed here (not delegated to std:: distributions, whose outputs are
// implementation-defined) so that seeded results are stable across
// toolchains and can be re-derived independently.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Sub-seed derivation: hash of (root seed, module name, unit key), finalized
// with splitmix64. Adding parallelism never changes which stream a unit gets.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view module,
                                 std::string_view unit = {}) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int i = 0; i < 8; ++i) {
    h ^= static_cast<unsigned char>(root >> (8 * i));
    h *= 0x100000001b3ULL;
  }
  h = fnv1a64(module, h);
  h = fnv1a64("/", h);
  h = fnv1a64(unit, h);
  return splitmix64(h);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Unbiased integer in [0, n) by threshold rejection.
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) throw Error("Rng::bounded: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = gen_();
      if (x >= threshold) return x % n;
    }
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller without caching: consumes two uniforms per draw. The first is
  // mapped to (0, 1] so the log never sees zero.
  double normal() {
    const double u1 =
        (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Knuth's product-of-uniforms method; adequate for the small means used here.
  int poisson(double mean) {
    if (mean < 0) throw Error("Rng::poisson: mean must be >= 0");
    if (mean == 0) return 0;
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  // Fisher-Yates with bounded().
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Weighted index draw, probability proportional to weights[i]. Weights must
  // be non-negative with a positive sum.
  std::size_t weighted(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) {
      if (w < 0) throw Error("Rng::weighted: negative weight");
      total += w;
    }
    if (total <= 0) throw Error("Rng::weighted: weights sum to zero");
    const double r = uniform() * total;
    double acc = 0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (r < acc) return i;
    }
    return weights.size() - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace dayvec
