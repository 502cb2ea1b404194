#include "abcpet/kinetics.hpp"

#include <atomic>
#include <cmath>

#include "abcpet/error.hpp"

namespace abcpet {

namespace {
std::atomic<std::uint64_t> g_forward_calls{0};
}

std::uint64_t forward_simulation_count() noexcept {
  return g_forward_calls.load(std::memory_order_relaxed);
}

void ResponseTiming::validate() const {
  if (!std::isfinite(tD) || !std::isfinite(tP) || !std::isfinite(alpha))
    fail(ErrorCode::InvalidArgument, "response timing must be finite");
  if (!(tP > tD)) fail(ErrorCode::InvalidArgument, "response peak must follow its delay");
  if (alpha < 0.0) fail(ErrorCode::InvalidArgument, "response sharpness must be >= 0");
}

void LpNtPetParams::validate() const {
  for (double v : {R1, k2, k2a, gamma})
    if (!std::isfinite(v) || v < 0.0)
      fail(ErrorCode::InvalidArgument, "lp-ntPET rates must be finite and >= 0");
  timing.validate();
}

double response_h(const ResponseTiming& timing, double t) noexcept {
  if (t <= timing.tD) return 0.0;
  const double x = (t - timing.tD) / (timing.tP - timing.tD);
  return std::pow(x, timing.alpha) * std::exp(timing.alpha * (1.0 - x));
}

FineCurve convolve(const FineCurve& input, double k2) {
  // For an exponential kernel the trapezoid sum obeys
  //   I_n = e^{-k2 dt} I_{n-1} + dt/2 (e^{-k2 dt} f_{n-1} + f_n).
  FineCurve out{input.step, std::vector<double>(input.size(), 0.0)};
  const double decay = std::exp(-k2 * input.step);
  const double half = 0.5 * input.step;
  for (std::size_t n = 1; n < input.size(); ++n)
    out.values[n] = decay * out.values[n - 1] +
                    half * (decay * input.values[n - 1] + input.values[n]);
  return out;
}

FineCurve convolve(const InputCurve& input, double k2, const TimeGrid& grid) {
  return convolve(input.sample(grid), k2);
}

Tac one_tissue_forward(const OneTissueParams& p, const InputCurve& ca, GridPtr grid) {
  if (!(p.K1 >= 0.0) || !(p.k2 >= 0.0))
    fail(ErrorCode::InvalidArgument, "one-tissue rates must be >= 0");
  FineCurve tissue = convolve(ca, p.k2, *grid);
  for (double& v : tissue.values) v *= p.K1;
  return frame_average(tissue, std::move(grid));
}

LpNtPetSimulator::LpNtPetSimulator(const InputCurve& cr, GridPtr grid)
    : grid_(std::move(grid)),
      cr_(cr.sample(*grid_)),
      cr_int_(cum_integral(cr_)),
      cr_id_(cr.id()) {}

FineCurve LpNtPetSimulator::simulate_fine(const LpNtPetParams& p) const {
  g_forward_calls.fetch_add(1, std::memory_order_relaxed);

  const std::size_t n_points = cr_.size();
  const double dt = cr_.step;
  const double half = 0.5 * dt;
  FineCurve ct{dt, std::vector<double>(n_points, 0.0)};

  // Running trapezoid integrals of C_t and C_t h up to the previous point.
  double int_ct = 0.0;
  double int_cth = 0.0;
  double prev_ct = 0.0;
  double prev_h = 0.0;
  for (std::size_t n = 0; n < n_points; ++n) {
    const double h = response_h(p.timing, ct.time(n));
    double rhs = p.R1 * cr_.values[n] + p.k2 * cr_int_.values[n];
    double coeff = 1.0;
    if (n > 0) {
      rhs -= p.k2a * (int_ct + half * prev_ct) +
             p.gamma * (int_cth + half * prev_ct * prev_h);
      coeff += half * (p.k2a + p.gamma * h);
    }
    if (!(coeff > 0.0))
      fail(ErrorCode::SingularStep,
           "lp-ntPET step coefficient is not positive; parameters are "
           "nonphysical at this step size");
    const double value = rhs / coeff;
    if (!std::isfinite(value))
      fail(ErrorCode::SingularStep, "lp-ntPET solution is not finite");
    if (n > 0) {
      int_ct += half * (prev_ct + value);
      int_cth += half * (prev_ct * prev_h + value * h);
    }
    ct.values[n] = value;
    prev_ct = value;
    prev_h = h;
  }
  return ct;
}

Tac LpNtPetSimulator::simulate(const LpNtPetParams& p) const {
  return frame_average(simulate_fine(p), grid_);
}

Tac lp_ntpet_forward(const LpNtPetParams& p, const InputCurve& cr, GridPtr grid) {
  return LpNtPetSimulator(cr, std::move(grid)).simulate(p);
}

}  // namespace abcpet
