#pragma once

#include <cmath>
#include <cstdint>

namespace tentlab {

// Counter-based random numbers: every draw is a pure function of
// (seed, stream, counter), so a draw never depends on how many other draws
// happened before it.  Estimates built on these are reproducible bit for bit
// under any evaluation order and any thread count.
namespace rng {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash3(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  std::uint64_t x = mix64(seed ^ 0x243f6a8885a308d3ull);
  x = mix64(x ^ stream);
  return mix64(x ^ counter);
}

// Uniform in (0, 1]; never returns 0, so it is safe inside a logarithm.
inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return static_cast<double>((hash3(seed, stream, counter) >> 11) + 1) * 0x1.0p-53;
}

// Standard Gaussian via Box-Muller; each (stream, counter) pair gives one
// independent draw.
inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const double u1 = uniform01(seed, stream, 2 * counter);
  const double u2 = uniform01(seed, stream, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

// Uniform integer in [0, n).
inline std::uint64_t pick(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter, std::uint64_t n) {
  return hash3(seed, stream, counter) % n;
}

}  // namespace rng
}  // namespace tentlab
