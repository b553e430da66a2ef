#pragma once

#include <cmath>
#include <cstdint>

namespace exprod {

// Deterministic counter-seeded generator. Each (seed, stream) pair yields an
// independent reproducible stream regardless of scheduling, which is what the
// per-firm / per-replicate concurrency contracts require. Distributions are
// hand-rolled on top of the raw 64-bit output so results are identical across
// standard libraries.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over (seed, stream) to decorrelate nearby streams
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    state_ = splitmix(z);
    inc_ = splitmix(state_ ^ 0xDA3E39CB94B95BDBULL) | 1ULL;
  }

  std::uint64_t next_u64() {
    // xorshift128+ style update on (state_, inc_)
    std::uint64_t x = state_;
    const std::uint64_t y = inc_;
    state_ = y;
    x ^= x << 23;
    inc_ = x ^ y ^ (x >> 17) ^ (y >> 26);
    return inc_ + y;
  }

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller; one draw consumes two uniforms
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // +1 or -1 with equal probability
  double rademacher() { return (next_u64() & 1ULL) ? 1.0 : -1.0; }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // multiply-shift rejection-free map; bias is negligible for n << 2^64
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  std::uint64_t inc_;
};

}  // namespace exprod
