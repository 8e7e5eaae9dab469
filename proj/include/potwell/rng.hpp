#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace potwell {

/// SplitMix64 (Steele, Lea, Flood 2014). Used both as a seed mixer and as
/// a cheap counter-based stream where one generator per (seed, walker,
/// step) is created.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

/// Reproducible sub-seed for a stream identified by (seed, k1, k2, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  SplitMix64 mix(seed);
  std::uint64_t h = mix();
  for (auto k : keys) {
    SplitMix64 step(h ^ (k + 0x632BE59BD9B4E019ULL));
    h = step();
  }
  return h;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::initializer_list<std::uint64_t> keys = {}) {
  return Engine(derive_seed(seed, keys));
}

}  // namespace potwell
