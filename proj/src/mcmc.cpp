#include "abcpet/mcmc.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "abcpet/error.hpp"
#include "abcpet/parallel.hpp"
#include "abcpet/rng.hpp"
#include "abcpet/wls.hpp"

namespace abcpet {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_prior(const UniformBox& box, const LpNtPetParams& p) {
  if (!box.contains(p, 0.0)) return kNegInf;
  const double span = box.tp_max - p.timing.tD - box.tp_offset;
  if (!(span > 0.0)) return kNegInf;
  return -std::log(span);
}

}  // namespace

void GaussianErrorModel::validate() const {
  if (!(variance_scale > 0.0) || std::isnan(variance_scale))
    fail(ErrorCode::InvalidArgument, "variance_scale must be positive");
}

double gaussian_log_density(std::span<const double> obs, std::span<const double> model,
                            const GaussianErrorModel& em) {
  em.validate();
  if (obs.size() != model.size()) fail(ErrorCode::GridMismatch, "model and data lengths differ");
  const double floor = variance_floor(obs);
  double ll = 0.0;
  for (std::size_t t = 0; t < obs.size(); ++t) {
    const double var = em.variance_scale * std::max(obs[t], floor);
    const double r = obs[t] - model[t];
    ll -= 0.5 * (r * r / var + std::log(2.0 * std::numbers::pi * var));
  }
  return ll;
}

double log_likelihood(const LpNtPetParams& theta, const Tac& obs,
                      const LpNtPetSimulator& sim, const GaussianErrorModel& em) {
  if (!sim.grid_ptr()->same_frames(obs.grid()))
    fail(ErrorCode::GridMismatch, "observation grid differs from the simulator grid");
  try {
    const Tac model = sim.simulate(theta);
    return gaussian_log_density(obs.values(), model.values(), em);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SingularStep) return kNegInf;
    throw;
  }
}

double log_likelihood(const LpNtPetParams& theta, const Tac& obs, const InputCurve& cr,
                      const GaussianErrorModel& em) {
  return log_likelihood(theta, obs, LpNtPetSimulator(cr, obs.grid_ptr()), em);
}

StepSizes default_step_sizes(const UniformBox& priors) {
  StepSizes s{};
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = 0.05 * priors.ranges[j].width();
  const double tp_width = priors.tp_max - priors.ranges[4].lo - priors.tp_offset;
  s[UniformBox::kTp] = 0.05 * priors.ranges[UniformBox::kTp].width() * tp_width;
  return s;
}

double McmcChain::acceptance_rate() const noexcept {
  return states.empty() ? 0.0
                        : static_cast<double>(accepted) / static_cast<double>(states.size());
}

std::array<double, LpNtPetParams::kSize> McmcChain::mean() const {
  if (states.empty()) fail(ErrorCode::InvalidArgument, "empty chain");
  std::array<double, LpNtPetParams::kSize> m{};
  for (const auto& s : states) {
    const auto a = s.to_array();
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += a[j];
  }
  for (double& v : m) v /= static_cast<double>(states.size());
  return m;
}

std::array<double, LpNtPetParams::kSize> McmcChain::sd() const {
  const auto m = mean();
  std::array<double, LpNtPetParams::kSize> v{};
  for (const auto& s : states) {
    const auto a = s.to_array();
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += (a[j] - m[j]) * (a[j] - m[j]);
  }
  const double denom = states.size() > 1 ? static_cast<double>(states.size() - 1) : 1.0;
  for (double& x : v) x = std::sqrt(x / denom);
  return v;
}

McmcChain rw_metropolis(const Tac& obs, const InputCurve& cr, const GaussianErrorModel& em,
                        const UniformBox& priors, const LpNtPetParams& init,
                        std::size_t steps, const StepSizes& step_sizes, std::uint64_t seed) {
  em.validate();
  priors.validate();
  for (double s : step_sizes)
    if (!(s >= 0.0) || !std::isfinite(s))
      fail(ErrorCode::InvalidArgument, "step sizes must be finite and non-negative");
  if (!priors.contains(init))
    fail(ErrorCode::InvalidArgument, "initial state lies outside the prior box");

  const LpNtPetSimulator sim(cr, obs.grid_ptr());
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::array<double, LpNtPetParams::kSize> current = init.to_array();
  double current_lp = log_prior(priors, init) + log_likelihood(init, obs, sim, em);

  McmcChain chain;
  chain.states.reserve(steps);
  chain.log_posterior.reserve(steps);
  for (std::size_t n = 0; n < steps; ++n) {
    auto proposal = current;
    for (std::size_t j = 0; j < proposal.size(); ++j) proposal[j] += step_sizes[j] * normal(rng);
    const double log_u = std::log(std::generate_canonical<double, 53>(rng));
    const LpNtPetParams theta = LpNtPetParams::from_array(proposal);
    double lp = log_prior(priors, theta);
    if (lp != kNegInf) lp += log_likelihood(theta, obs, sim, em);
    if (lp != kNegInf && log_u < lp - current_lp) {
      current = proposal;
      current_lp = lp;
      ++chain.accepted;
    }
    chain.states.push_back(LpNtPetParams::from_array(current));
    chain.log_posterior.push_back(current_lp);
  }
  return chain;
}

std::vector<McmcChain> rw_metropolis_chains(const Tac& obs, const InputCurve& cr,
                                            const GaussianErrorModel& em,
                                            const UniformBox& priors,
                                            const LpNtPetParams& init, std::size_t steps,
                                            const StepSizes& step_sizes, std::size_t chains,
                                            std::uint64_t seed) {
  std::vector<McmcChain> out(chains);
  parallel_for(chains, [&](std::size_t c) {
    out[c] = rw_metropolis(obs, cr, em, priors, init, steps, step_sizes, derive_seed(seed, c));
  });
  return out;
}

}  // namespace abcpet
