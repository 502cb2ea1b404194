#pragma once

#include <array>

#include "abcpet/kinetics.hpp"
#include "abcpet/rng.hpp"

namespace abcpet {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const noexcept { return hi - lo; }
  bool contains(double v, double tol = 0.0) const noexcept {
    return v >= lo - tol && v <= hi + tol;
  }
  bool within(const Interval& outer, double tol = 0.0) const noexcept {
    return lo >= outer.lo - tol && hi <= outer.hi + tol;
  }
  bool operator==(const Interval&) const = default;
};

// Independent uniform ranges over (R1, k2, k2a, gamma, tD, tP, alpha).
//
// tP is conditional on tD: its prior is U(tD + tp_offset, tp_max). The box
// stores tP on that conditional scale, as the fraction
//   u = (tP - tD - tp_offset) / (tp_max - tD - tp_offset)  in [0, 1],
// so truncating u keeps the sampling density proportional to the prior.
struct UniformBox {
  static constexpr std::size_t kTp = 5;

  std::array<Interval, LpNtPetParams::kSize> ranges{};
  double tp_offset = 1.0;
  double tp_max = 35.0;

  void validate() const;

  // Draws in the fixed order R1, k2, k2a, gamma, tD, tP, alpha. tP is
  // drawn on the half-open (lo, hi] side of its range so that tP > tD +
  // tp_offset strictly under the prior.
  LpNtPetParams sample(Rng& rng) const;

  double tp_fraction(const LpNtPetParams& p) const noexcept;
  double tp_from_fraction(double tD, double u) const noexcept;

  // Absolute tP range implied for a given tD.
  Interval tp_range(double tD) const noexcept;

  bool contains(const LpNtPetParams& p, double tol = 1e-12) const noexcept;
  bool within(const UniformBox& outer, double tol = 1e-12) const noexcept;

  // Point mass at p (up to rounding in tP).
  static UniformBox point(const LpNtPetParams& p, double tp_offset = 1.0,
                          double tp_max = 35.0);
};

// R1~U(0,20), k2~U(0,10), k2a~U(0,10), gamma~U(0,5), tD~U(15,25),
// tP~U(tD+1,35), alpha~U(0,25).
UniformBox default_priors();

// Reference narrowed box: R1~U(0,5), k2~U(0,1), k2a~U(0,0.2), gamma~U(0,2),
// timing parameters at their priors.
UniformBox narrowed_reference_box();

}  // namespace abcpet
