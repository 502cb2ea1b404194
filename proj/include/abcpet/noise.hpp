#pragma once

#include <array>
#include <cstdint>

#include "abcpet/signal.hpp"

namespace abcpet {

// Scaled-Poisson noise strength: a frame value v becomes Poisson(scale v) / scale,
// so the variance is v / scale. Level 0 means noiseless (scale = +inf).
struct NoiseLevel {
  int level = 0;
  double scale = 0.0;

  bool noiseless() const noexcept;
};

// Counts-per-unit scales for levels 1..4, highest to lowest noise.
struct NoiseConfig {
  std::array<double, 4> scales{0.25, 1.0, 4.0, 16.0};

  void validate() const;
  NoiseLevel level(int level) const;
};

// Throws NegativeActivity if any frame value is negative.
Tac apply_poisson(const Tac& tac, const NoiseLevel& level, std::uint64_t seed);

}  // namespace abcpet
