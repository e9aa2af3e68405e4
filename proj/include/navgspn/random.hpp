#pragma once

// Seed splitting and uniform draws shared by the simulator and EM restarts.

#include <cstdint>
#include <random>

namespace navgspn {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

namespace detail {
// Uniform in [0, 1) with 53 random bits. Avoids std::uniform_real_distribution,
// whose output is implementation-defined.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
}  // namespace detail

}  // namespace navgspn
