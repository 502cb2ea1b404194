#pragma once

// Random-walk Metropolis baseline under an independent Gaussian error model.

#include <array>
#include <cstdint>
#include <vector>

#include "abcpet/kinetics.hpp"
#include "abcpet/priors.hpp"

namespace abcpet {

// Frame variance = variance_scale * max(obs_t, floor), with the WLS weight floor.
struct GaussianErrorModel {
  double variance_scale = 1.0;

  void validate() const;
};

// -inf if the forward solve hits SingularStep.
double log_likelihood(const LpNtPetParams& theta, const Tac& obs, const InputCurve& cr,
                      const GaussianErrorModel& em);
// Same, with a prebuilt simulator on the observation grid.
double log_likelihood(const LpNtPetParams& theta, const Tac& obs,
                      const LpNtPetSimulator& sim, const GaussianErrorModel& em);
// Sum of Gaussian log-densities for a given model curve.
double gaussian_log_density(std::span<const double> obs, std::span<const double> model,
                            const GaussianErrorModel& em);

using StepSizes = std::array<double, LpNtPetParams::kSize>;

// 5% of each prior width; tP uses the widest conditional range.
StepSizes default_step_sizes(const UniformBox& priors);

struct McmcChain {
  std::vector<LpNtPetParams> states;  // one per step, init excluded
  std::vector<double> log_posterior;
  std::uint64_t accepted = 0;

  double acceptance_rate() const noexcept;
  std::array<double, LpNtPetParams::kSize> mean() const;
  std::array<double, LpNtPetParams::kSize> sd() const;
};

// Symmetric Gaussian proposals in (R1, k2, k2a, gamma, tD, tP, alpha).
// Proposals outside the prior box are rejected; the target is prior x
// likelihood where the prior includes the conditional density of tP given tD.
// Parameters with step size 0 stay fixed.
McmcChain rw_metropolis(const Tac& obs, const InputCurve& cr, const GaussianErrorModel& em,
                        const UniformBox& priors, const LpNtPetParams& init,
                        std::size_t steps, const StepSizes& step_sizes, std::uint64_t seed);

// Independent chains, chain c seeded by derive_seed(seed, c).
std::vector<McmcChain> rw_metropolis_chains(const Tac& obs, const InputCurve& cr,
                                            const GaussianErrorModel& em,
                                            const UniformBox& priors,
                                            const LpNtPetParams& init, std::size_t steps,
                                            const StepSizes& step_sizes, std::size_t chains,
                                            std::uint64_t seed);

}  // namespace abcpet
