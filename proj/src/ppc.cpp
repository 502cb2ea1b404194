#include "abcpet/ppc.hpp"

#include <algorithm>
#include <cmath>

#include "abcpet/error.hpp"
#include "abcpet/parallel.hpp"
#include "abcpet/rng.hpp"

namespace abcpet {

PredictiveBands predictive_bands(const std::vector<LpNtPetParams>& thetas,
                                 const InputCurve& cr, const GridPtr& grid,
                                 const std::optional<NoiseLevel>& noise, std::uint64_t seed) {
  if (thetas.empty()) fail(ErrorCode::EmptyPosterior, "posterior is empty");
  const std::size_t frames = grid->frame_count();
  const std::size_t draws = std::max(kMinPredictiveDraws, thetas.size());
  const bool noisy = noise && !noise->noiseless();
  const LpNtPetSimulator sim(cr, grid);

  std::vector<double> table(draws * frames);
  parallel_for(draws, [&](std::size_t d) {
    Tac tac = sim.simulate(thetas[d % thetas.size()]);
    if (noisy) {
      std::vector<double> v(tac.values().begin(), tac.values().end());
      for (double& x : v) x = std::max(x, 0.0);
      tac = apply_poisson(Tac(grid, std::move(v)), *noise, derive_seed(seed, d));
    }
    std::ranges::copy(tac.values(), table.begin() + static_cast<std::ptrdiff_t>(d * frames));
  });

  PredictiveBands out;
  out.grid = grid;
  out.n_draws = draws;
  out.mean.resize(frames);
  out.lo.resize(frames);
  out.hi.resize(frames);
  const auto rank = [draws](double q) {
    const auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(draws)));
    return std::clamp<std::size_t>(r, 1, draws) - 1;
  };
  const std::size_t r_lo = rank(kBandLower);
  const std::size_t r_hi = rank(kBandUpper);
  std::vector<double> column(draws);
  for (std::size_t t = 0; t < frames; ++t) {
    double sum = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
      column[d] = table[d * frames + t];
      sum += column[d];
    }
    out.mean[t] = sum / static_cast<double>(draws);
    std::sort(column.begin(), column.end());
    out.lo[t] = column[r_lo];
    out.hi[t] = column[r_hi];
  }
  return out;
}

PredictiveBands predictive_bands(const PosteriorSet& posterior, const InputCurve& cr,
                                 const GridPtr& grid, const std::optional<NoiseLevel>& noise,
                                 std::uint64_t seed) {
  std::vector<LpNtPetParams> thetas;
  thetas.reserve(posterior.samples.size());
  for (const auto& s : posterior.samples) thetas.push_back(s.theta);
  return predictive_bands(thetas, cr, grid, noise, seed);
}

double coverage(const PredictiveBands& bands, const Tac& truth) {
  if (!bands.grid || !bands.grid->same_frames(truth.grid()) ||
      bands.lo.size() != truth.values().size())
    fail(ErrorCode::GridMismatch, "bands and truth are on different grids");
  const auto v = truth.values();
  std::size_t inside = 0;
  for (std::size_t t = 0; t < v.size(); ++t)
    if (bands.lo[t] <= v[t] && v[t] <= bands.hi[t]) ++inside;
  return static_cast<double>(inside) / static_cast<double>(v.size());
}

}  // namespace abcpet
