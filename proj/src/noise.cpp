#include "abcpet/noise.hpp"

#include <cmath>
#include <random>
#include <string>

#include "abcpet/error.hpp"
#include "abcpet/rng.hpp"

namespace abcpet {

bool NoiseLevel::noiseless() const noexcept {
  return level == 0 || std::isinf(scale);
}

void NoiseConfig::validate() const {
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0) || !std::isfinite(scales[i]))
      fail(ErrorCode::InvalidArgument, "noise scales must be positive and finite");
    if (i > 0 && !(scales[i] > scales[i - 1]))
      fail(ErrorCode::InvalidArgument,
           "noise scales must increase from level 1 to level 4");
  }
}

NoiseLevel NoiseConfig::level(int level) const {
  if (level == 0) return {0, INFINITY};
  if (level < 1 || level > 4)
    fail(ErrorCode::InvalidArgument,
         "noise level must be 0 (none) or 1..4, got " + std::to_string(level));
  return {level, scales[static_cast<std::size_t>(level - 1)]};
}

Tac apply_poisson(const Tac& tac, const NoiseLevel& level, std::uint64_t seed) {
  for (double v : tac.values())
    if (v < 0.0) fail(ErrorCode::NegativeActivity, "cannot apply Poisson noise to negative activity");
  if (level.noiseless()) return tac;
  if (!(level.scale > 0.0)) fail(ErrorCode::InvalidArgument, "noise scale must be positive");

  Rng rng(seed);
  std::vector<double> out(tac.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double mean = level.scale * tac[i];
    if (mean == 0.0) {
      out[i] = 0.0;
      continue;
    }
    std::poisson_distribution<std::int64_t> counts(mean);
    out[i] = static_cast<double>(counts(rng)) / level.scale;
  }
  return Tac(tac.grid_ptr(), std::move(out));
}

}  // namespace abcpet
