// Deterministic random streams. All draws go through mt19937_64 plus the
// fixed transforms below instead of std::*_distribution, whose output is
// implementation defined; this keeps trajectories bit-identical across
// standard libraries, which the reproducibility contract relies on.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace vqsense {

using Rng = std::mt19937_64;

// Uniform in [0, 1) with 53 random mantissa bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform in (-pi, pi].
inline double uniform_angle(Rng& rng) {
  return std::numbers::pi * (1.0 - 2.0 * uniform01(rng));
}

// Standard normal via Box-Muller; consumes exactly two uniforms per call.
inline double gaussian(Rng& rng) {
  const double u1 = uniform01(rng);  // 1 - u1 in (0, 1], so the log is finite
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log1p(-u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// splitmix64-style mix of (master seed, stream id); used to hand every agent
// its own policy / noise / measurement streams so runs compose and stay
// comparable when one stream's consumption pattern changes.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
  std::uint64_t x = master + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace vqsense
