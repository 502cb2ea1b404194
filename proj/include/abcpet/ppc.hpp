#pragma once

// Posterior predictive bands: per-frame mean and central 95% interval of
// TACs simulated from posterior draws.

#include <cstdint>
#include <optional>
#include <vector>

#include "abcpet/abc.hpp"
#include "abcpet/noise.hpp"

namespace abcpet {

struct PredictiveBands {
  GridPtr grid;
  std::vector<double> mean;
  std::vector<double> lo;  // nearest-rank 2.5 percentile
  std::vector<double> hi;  // nearest-rank 97.5 percentile
  std::size_t n_draws = 0;
};

inline constexpr std::size_t kMinPredictiveDraws = 100;
inline constexpr double kBandLower = 0.025;
inline constexpr double kBandUpper = 0.975;

// max(100, |posterior|) draws; draw d simulates posterior sample d mod
// |posterior| and, when a noise level is given, applies Poisson noise with
// seed derive_seed(seed, d). Negative simulated values are clipped to 0
// before noise. Throws EmptyPosterior.
PredictiveBands predictive_bands(const std::vector<LpNtPetParams>& thetas,
                                 const InputCurve& cr, const GridPtr& grid,
                                 const std::optional<NoiseLevel>& noise, std::uint64_t seed);
PredictiveBands predictive_bands(const PosteriorSet& posterior, const InputCurve& cr,
                                 const GridPtr& grid, const std::optional<NoiseLevel>& noise,
                                 std::uint64_t seed);

// Fraction of frames with lo <= truth <= hi. Throws GridMismatch.
double coverage(const PredictiveBands& bands, const Tac& truth);

}  // namespace abcpet
