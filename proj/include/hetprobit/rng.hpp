#pragma once

// Self-contained, portable random number generation.
//
// std::mt19937_64 is portable but the standard distributions are not
// (uniform_real_distribution and normal_distribution are allowed to differ
// across standard libraries), and seeded experiments here must reproduce
// byte-for-byte everywhere. So the engine is xoshiro256++ seeded through
// splitmix64, and the uniform/normal transforms are spelled out below.
//
// Stream splitting: substream(seed, id) feeds seed and id through
// splitmix64 and uses four outputs as the xoshiro state. The library
// derives one substream per logical consumer (per observation in the DGP,
// per run index in the multi-start harness) so results are independent of
// evaluation order and thread count.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace hetprobit {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += kGolden);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  // Independent substream `id` of the master `seed`.
  static Rng substream(std::uint64_t seed, std::uint64_t id) {
    SplitMix64 sm(seed);
    std::uint64_t base = sm.next();
    return Rng(base ^ (kGolden * (id + 1)));
  }

  // xoshiro256++
  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe to pass to log().
  double uniform01_open0() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli_half() { return (next_u64() >> 63) != 0; }

  // Standard normal via Box-Muller; consumes exactly two uniforms per draw.
  double normal() {
    const double u1 = uniform01_open0();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> s_{};
};

// Deterministic child seed for (seed, id); for components that take a seed
// value rather than a ready-made stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t id) {
  SplitMix64 sm(seed ^ (kGolden * (id + 1)));
  return sm.next();
}

}  // namespace hetprobit
