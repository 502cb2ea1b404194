#pragma once

// Compartmental forward models on a TimeGrid.

#include <array>
#include <cstdint>
#include <string_view>

#include "abcpet/input_curve.hpp"
#include "abcpet/signal.hpp"

namespace abcpet {

struct OneTissueParams {
  double K1 = 0.0;  // influx, 1/min
  double k2 = 0.0;  // efflux, 1/min
};

// Time course of the transient response h(t).
struct ResponseTiming {
  double tD = 0.0;     // delay, min
  double tP = 0.0;     // peak, min
  double alpha = 0.0;  // sharpness

  void validate() const;
  bool operator==(const ResponseTiming&) const = default;
};

// Parameter vector of the lp-ntPET operational equation. Array order is
// (R1, k2, k2a, gamma, tD, tP, alpha) everywhere in the library.
struct LpNtPetParams {
  static constexpr std::size_t kSize = 7;
  static constexpr std::array<std::string_view, kSize> kNames = {
      "R1", "k2", "k2a", "gamma", "tD", "tP", "alpha"};

  double R1 = 0.0;
  double k2 = 0.0;
  double k2a = 0.0;
  double gamma = 0.0;
  ResponseTiming timing;

  std::array<double, kSize> to_array() const {
    return {R1, k2, k2a, gamma, timing.tD, timing.tP, timing.alpha};
  }
  static LpNtPetParams from_array(const std::array<double, kSize>& a) {
    return {a[0], a[1], a[2], a[3], {a[4], a[5], a[6]}};
  }
  // Throws InvalidArgument unless every rate is non-negative and the timing is valid.
  void validate() const;
  bool operator==(const LpNtPetParams&) const = default;
};

// h(t) = x^alpha exp(alpha (1 - x)) u(t - tD), x = (t - tD) / (tP - tD).
// Exactly 0 for t <= tD and exactly 1 at t = tP.
double response_h(const ResponseTiming& timing, double t) noexcept;

// (input (x) exp(-k2 t)) on the fine grid of `grid`, trapezoidal quadrature.
FineCurve convolve(const InputCurve& input, double k2, const TimeGrid& grid);
FineCurve convolve(const FineCurve& input, double k2);

Tac one_tissue_forward(const OneTissueParams& p, const InputCurve& ca, GridPtr grid);

// Solves
//   C_t(t) = R1 C_R(t) + k2 int C_R - k2a int C_t - gamma int C_t h
// with the trapezoid rule on the fine grid, implicit in the newest point.
// Throws SingularStep when 1 + dt/2 (k2a + gamma h(t_n)) <= 0 at some step.
Tac lp_ntpet_forward(const LpNtPetParams& p, const InputCurve& cr, GridPtr grid);

// Reusable forward solver: samples C_R and its running integral once.
class LpNtPetSimulator {
 public:
  LpNtPetSimulator(const InputCurve& cr, GridPtr grid);

  FineCurve simulate_fine(const LpNtPetParams& p) const;
  Tac simulate(const LpNtPetParams& p) const;

  const GridPtr& grid_ptr() const noexcept { return grid_; }
  const FineCurve& reference_fine() const noexcept { return cr_; }
  const FineCurve& reference_integral() const noexcept { return cr_int_; }
  const std::string& reference_id() const noexcept { return cr_id_; }

 private:
  GridPtr grid_;
  FineCurve cr_;
  FineCurve cr_int_;
  std::string cr_id_;
};

// Number of lp-ntPET forward solves performed in this process.
std::uint64_t forward_simulation_count() noexcept;

}  // namespace abcpet
