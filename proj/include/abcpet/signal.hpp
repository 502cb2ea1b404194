#pragma once

// Time axes and sampled signals shared by every model.
//
// Two resolutions exist side by side: the acquisition frames of a scan
// (TimeGrid frames, typically 60 x 1 min) and a uniform fine grid starting
// at t = 0 on which all integrals are evaluated (FineCurve).

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace abcpet {

class TimeGrid {
 public:
  // Frames must be ordered, non-overlapping and of positive duration; the
  // fine step must not exceed the shortest frame.
  TimeGrid(std::vector<double> frame_starts, std::vector<double> frame_ends,
           double sub_step);

  static TimeGrid uniform(std::size_t n_frames, double frame_minutes,
                          double sub_step);

  std::size_t frame_count() const noexcept { return starts_.size(); }
  std::span<const double> frame_starts() const noexcept { return starts_; }
  std::span<const double> frame_ends() const noexcept { return ends_; }
  double frame_start(std::size_t i) const { return starts_[i]; }
  double frame_end(std::size_t i) const { return ends_[i]; }
  double midpoint(std::size_t i) const { return 0.5 * (starts_[i] + ends_[i]); }
  std::vector<double> midpoints() const;
  double end_time() const noexcept { return ends_.back(); }

  double sub_step() const noexcept { return sub_step_; }

  // The fine grid is t_j = j * fine_step(), j = 0..fine_intervals(). The
  // step is end_time / ceil(end_time / sub_step) so it never exceeds
  // sub_step and lands exactly on end_time.
  std::size_t fine_intervals() const noexcept { return fine_intervals_; }
  std::size_t fine_count() const noexcept { return fine_intervals_ + 1; }
  double fine_step() const noexcept { return fine_step_; }
  double fine_time(std::size_t j) const noexcept {
    return static_cast<double>(j) * fine_step_;
  }

  // Same frames, different fine resolution.
  TimeGrid with_sub_step(double sub_step) const;

  // Stable textual identity, used for cache provenance.
  std::string id() const;

  bool same_frames(const TimeGrid& other) const noexcept;

 private:
  std::vector<double> starts_;
  std::vector<double> ends_;
  double sub_step_;
  std::size_t fine_intervals_ = 0;
  double fine_step_ = 0.0;
};

using GridPtr = std::shared_ptr<const TimeGrid>;

inline GridPtr make_grid(TimeGrid grid) {
  return std::make_shared<const TimeGrid>(std::move(grid));
}

// Samples on a uniform grid t_j = j * step starting at zero.
struct FineCurve {
  double step = 0.0;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double time(std::size_t j) const noexcept {
    return static_cast<double>(j) * step;
  }
  double end_time() const noexcept {
    return values.empty() ? 0.0 : time(values.size() - 1);
  }
  // Linear interpolation, clamped to the sampled range.
  double at(double t) const;
};

// Trapezoidal running integral from 0; output[0] = 0.
FineCurve cum_integral(const FineCurve& curve);

// Integral of the piecewise-linear interpolant from 0 to t, given the
// running integral of the same curve.
double integral_to(const FineCurve& curve, const FineCurve& running, double t);

// Per-frame activity values on a TimeGrid.
class Tac {
 public:
  Tac(GridPtr grid, std::vector<double> values);

  const TimeGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double max_value() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

// Per-frame trapezoidal mean of a fine curve over [frame_start, frame_end].
Tac frame_average(const FineCurve& fine, GridPtr grid);

}  // namespace abcpet
