#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace spacl::rng {

// splitmix64: cheap, well-mixed 64-bit hash used to derive independent
// sub-stream seeds from (master seed, stream id, purpose tag).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t tag) {
  return splitmix64(splitmix64(master ^ splitmix64(tag)) ^ stream);
}

// Stream tags; one per randomness consumer so streams never collide.
inline constexpr std::uint64_t kTagTheta = 0x7468657461ULL;       // membership rows
inline constexpr std::uint64_t kTagPurePlacement = 0x70757265ULL; // pure-row choice
inline constexpr std::uint64_t kTagAdjacency = 0x61646a61ULL;     // adjacency rows

using Engine = std::mt19937_64;

inline double uniform01(Engine& eng) {
  // 53-bit mantissa uniform in [0,1); implementation-pinned, unlike
  // std::uniform_real_distribution.
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double standard_normal(Engine& eng) {
  // Marsaglia polar method; consumes a data-independent-free number of draws
  // but each row owns its stream so replay stays exact.
  double u, v, s;
  do {
    u = 2.0 * uniform01(eng) - 1.0;
    v = 2.0 * uniform01(eng) - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

// Log of a Gamma(shape, 1) draw via Marsaglia-Tsang, boosted for shape < 1.
// Returning the log keeps tiny-shape draws (shape ~ 1e-9) usable: the raw
// sample underflows to zero but its log is finite.
inline double log_gamma_draw(Engine& eng, double shape) {
  if (shape < 1.0) {
    const double lg = log_gamma_draw(eng, shape + 1.0);
    double u = uniform01(eng);
    while (u <= 0.0) u = uniform01(eng);
    return lg + std::log(u) / shape;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(eng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = uniform01(eng);
    while (u <= 0.0) u = uniform01(eng);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      return std::log(d * v);
    }
  }
}

}  // namespace spacl::rng
