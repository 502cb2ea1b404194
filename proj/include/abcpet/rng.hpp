#pragma once

#include <cstdint>
#include <random>

namespace abcpet {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed for stream `index` under `master`: the (index + 1)-th output of a
// splitmix64 generator started at `master`. Realisations, cache entries and
// predictive draws all derive their seeds this way.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::uint64_t index) noexcept {
  std::uint64_t state = master + index * 0x9E3779B97F4A7C15ULL;
  return splitmix64(state);
}

// Sub-streams for distinct purposes under one master seed.
enum class Stream : std::uint64_t {
  Noise = 1,
  Cache = 2,
  Library = 3,
  Mcmc = 4,
  Predictive = 5,
};

inline std::uint64_t stream_seed(std::uint64_t master, Stream s) noexcept {
  std::uint64_t state = master ^ (static_cast<std::uint64_t>(s) << 56);
  return splitmix64(state);
}

inline double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace abcpet
