#include "abcpet/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>

#include "abcpet/error.hpp"

namespace abcpet {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Ok: return "Ok";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IOError: return "IOError";
    case ErrorCode::SingularStep: return "SingularStep";
    case ErrorCode::NegativeActivity: return "NegativeActivity";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::MissingContext: return "MissingContext";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NoValidFit: return "NoValidFit";
    case ErrorCode::EmptyPosterior: return "EmptyPosterior";
    case ErrorCode::GridMismatch: return "GridMismatch";
  }
  return "Unknown";
}

TimeGrid::TimeGrid(std::vector<double> frame_starts,
                   std::vector<double> frame_ends, double sub_step)
    : starts_(std::move(frame_starts)),
      ends_(std::move(frame_ends)),
      sub_step_(sub_step) {
  if (starts_.empty() || starts_.size() != ends_.size())
    fail(ErrorCode::InvalidArgument,
         "time grid needs matching, non-empty frame start/end lists");
  double min_duration = INFINITY;
  for (std::size_t i = 0; i < starts_.size(); ++i) {
    if (!std::isfinite(starts_[i]) || !std::isfinite(ends_[i]))
      fail(ErrorCode::InvalidArgument, "frame times must be finite");
    if (!(ends_[i] > starts_[i]))
      fail(ErrorCode::InvalidArgument, "frame end must exceed frame start");
    if (i > 0 && !(starts_[i] > starts_[i - 1] && starts_[i] >= ends_[i - 1]))
      fail(ErrorCode::InvalidArgument,
           "frames must be strictly increasing and non-overlapping");
    min_duration = std::min(min_duration, ends_[i] - starts_[i]);
  }
  if (starts_.front() < 0.0)
    fail(ErrorCode::InvalidArgument, "frames cannot start before t = 0");
  // Allow a few ulps so that 1-minute frames with a 1-minute step pass.
  if (!(sub_step_ > 0.0) || sub_step_ > min_duration * (1.0 + 1e-12))
    fail(ErrorCode::InvalidArgument,
         "sub_step must be positive and no longer than the shortest frame");

  const double end = ends_.back();
  fine_intervals_ = static_cast<std::size_t>(std::ceil(end / sub_step_ - 1e-9));
  fine_intervals_ = std::max<std::size_t>(fine_intervals_, 1);
  fine_step_ = end / static_cast<double>(fine_intervals_);
}

TimeGrid TimeGrid::uniform(std::size_t n_frames, double frame_minutes,
                           double sub_step) {
  if (n_frames == 0 || !(frame_minutes > 0.0))
    fail(ErrorCode::InvalidArgument, "uniform grid needs frames of positive length");
  std::vector<double> starts(n_frames), ends(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    starts[i] = static_cast<double>(i) * frame_minutes;
    ends[i] = static_cast<double>(i + 1) * frame_minutes;
  }
  return TimeGrid(std::move(starts), std::move(ends), sub_step);
}

std::vector<double> TimeGrid::midpoints() const {
  std::vector<double> out(frame_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = midpoint(i);
  return out;
}

TimeGrid TimeGrid::with_sub_step(double sub_step) const {
  return TimeGrid(starts_, ends_, sub_step);
}

std::string TimeGrid::id() const {
  // FNV-1a over the raw frame boundaries and step keeps ids short but exact.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](double v) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  };
  for (std::size_t i = 0; i < starts_.size(); ++i) {
    mix(starts_[i]);
    mix(ends_[i]);
  }
  mix(sub_step_);
  char buf[96];
  std::snprintf(buf, sizeof buf, "frames=%zu,end=%.17g,sub=%.17g,h=%016llx",
                frame_count(), end_time(), sub_step_,
                static_cast<unsigned long long>(h));
  return buf;
}

bool TimeGrid::same_frames(const TimeGrid& other) const noexcept {
  return starts_ == other.starts_ && ends_ == other.ends_;
}

double FineCurve::at(double t) const {
  if (values.empty()) return 0.0;
  if (t <= 0.0) return values.front();
  const double pos = t / step;
  const auto j = static_cast<std::size_t>(pos);
  if (j + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(j);
  return values[j] + frac * (values[j + 1] - values[j]);
}

FineCurve cum_integral(const FineCurve& curve) {
  FineCurve out{curve.step, std::vector<double>(curve.size(), 0.0)};
  const double half = 0.5 * curve.step;
  for (std::size_t j = 1; j < curve.size(); ++j)
    out.values[j] =
        out.values[j - 1] + half * (curve.values[j - 1] + curve.values[j]);
  return out;
}

double integral_to(const FineCurve& curve, const FineCurve& running, double t) {
  if (t <= 0.0 || curve.values.empty()) return 0.0;
  const double pos = t / curve.step;
  auto j = static_cast<std::size_t>(pos);
  if (j + 1 >= curve.size()) return running.values.back();
  const double frac = pos - static_cast<double>(j);
  if (frac <= 0.0) return running.values[j];
  // Exact integral of the linear piece over [t_j, t].
  const double dt = frac * curve.step;
  const double v0 = curve.values[j];
  const double vt = v0 + frac * (curve.values[j + 1] - v0);
  return running.values[j] + 0.5 * dt * (v0 + vt);
}

Tac::Tac(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) fail(ErrorCode::InvalidArgument, "TAC needs a time grid");
  if (values_.size() != grid_->frame_count())
    fail(ErrorCode::InvalidArgument, "TAC length does not match frame count");
  for (double v : values_)
    if (!std::isfinite(v))
      fail(ErrorCode::InvalidArgument, "TAC values must be finite");
}

double Tac::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

Tac frame_average(const FineCurve& fine, GridPtr grid) {
  if (fine.end_time() < grid->end_time() * (1.0 - 1e-12))
    fail(ErrorCode::InvalidArgument, "fine curve does not span every frame");
  const FineCurve running = cum_integral(fine);
  std::vector<double> out(grid->frame_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double a = grid->frame_start(i);
    const double b = grid->frame_end(i);
    out[i] = (integral_to(fine, running, b) - integral_to(fine, running, a)) /
             (b - a);
  }
  return Tac(std::move(grid), std::move(out));
}

}  // namespace abcpet
