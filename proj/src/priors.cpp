#include "abcpet/priors.hpp"

#include <cmath>

#include "abcpet/error.hpp"

namespace abcpet {

void UniformBox::validate() const {
  for (const Interval& r : ranges)
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi)
      fail(ErrorCode::InvalidArgument, "box ranges need finite lo <= hi");
  const Interval& u = ranges[kTp];
  if (u.lo < 0.0 || u.hi > 1.0)
    fail(ErrorCode::InvalidArgument, "tP fraction range must lie in [0, 1]");
  if (!(tp_max > ranges[4].hi + tp_offset))
    fail(ErrorCode::InvalidArgument, "tP upper bound must exceed tD upper bound + offset");
}

LpNtPetParams UniformBox::sample(Rng& rng) const {
  LpNtPetParams p;
  p.R1 = uniform(rng, ranges[0].lo, ranges[0].hi);
  p.k2 = uniform(rng, ranges[1].lo, ranges[1].hi);
  p.k2a = uniform(rng, ranges[2].lo, ranges[2].hi);
  p.gamma = uniform(rng, ranges[3].lo, ranges[3].hi);
  p.timing.tD = uniform(rng, ranges[4].lo, ranges[4].hi);
  const Interval& u = ranges[kTp];
  const double frac = u.hi - uniform(rng, 0.0, 1.0) * (u.hi - u.lo);
  p.timing.tP = tp_from_fraction(p.timing.tD, frac);
  p.timing.alpha = uniform(rng, ranges[6].lo, ranges[6].hi);
  return p;
}

double UniformBox::tp_fraction(const LpNtPetParams& p) const noexcept {
  const double lo = p.timing.tD + tp_offset;
  return (p.timing.tP - lo) / (tp_max - lo);
}

double UniformBox::tp_from_fraction(double tD, double u) const noexcept {
  const double lo = tD + tp_offset;
  return lo + u * (tp_max - lo);
}

Interval UniformBox::tp_range(double tD) const noexcept {
  return {tp_from_fraction(tD, ranges[kTp].lo), tp_from_fraction(tD, ranges[kTp].hi)};
}

bool UniformBox::contains(const LpNtPetParams& p, double tol) const noexcept {
  const auto a = p.to_array();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = i == kTp ? tp_fraction(p) : a[i];
    if (!ranges[i].contains(v, tol)) return false;
  }
  return true;
}

bool UniformBox::within(const UniformBox& outer, double tol) const noexcept {
  if (tp_offset != outer.tp_offset || tp_max != outer.tp_max) return false;
  for (std::size_t i = 0; i < ranges.size(); ++i)
    if (!ranges[i].within(outer.ranges[i], tol)) return false;
  return true;
}

UniformBox UniformBox::point(const LpNtPetParams& p, double tp_offset, double tp_max) {
  UniformBox box;
  box.tp_offset = tp_offset;
  box.tp_max = tp_max;
  const auto a = p.to_array();
  for (std::size_t i = 0; i < a.size(); ++i) box.ranges[i] = {a[i], a[i]};
  const double u = box.tp_fraction(p);
  box.ranges[kTp] = {u, u};
  return box;
}

UniformBox default_priors() {
  UniformBox box;
  box.ranges = {Interval{0, 20}, {0, 10}, {0, 10}, {0, 5}, {15, 25}, {0, 1}, {0, 25}};
  box.tp_offset = 1.0;
  box.tp_max = 35.0;
  return box;
}

UniformBox narrowed_reference_box() {
  UniformBox box = default_priors();
  box.ranges[0] = {0, 5};
  box.ranges[1] = {0, 1};
  box.ranges[2] = {0, 0.2};
  box.ranges[3] = {0, 2};
  return box;
}

}  // namespace abcpet
