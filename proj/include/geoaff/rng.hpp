#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace geoaff {

// Name + version of the random number scheme, pinned into report metadata.
// Contract: identical (seed, stream) always yields the identical draw
// sequence, across thread counts and across rebuilds of this code base.
inline constexpr const char* kRngName = "mt19937_64+splitmix64-streams/v1";

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic seeded stream. Distribution transforms are implemented here
// rather than taken from <random>, whose distribution outputs are
// implementation-defined and therefore not reproducible across toolchains.
// Streams: Rng(seed, k) for distinct k are independent-for-purpose lanes;
// parallel work derives one stream per work item so schedules cannot matter.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    engine_.seed(splitmix64_next(s));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Unbiased integer in [0, bound); bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t min = (0ULL - bound) % bound;  // 2^64 mod bound
    std::uint64_t v;
    do {
      v = engine_();
    } while (v < min);
    return v % bound;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return double(engine_() >> 11) * 0x1.0p-53; }

  // Box-Muller (cosine branch); deterministic, no internal caching.
  double normal(double mean = 0.0, double sd = 1.0) {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log() finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace geoaff
