#include "abcpet/input_curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "abcpet/error.hpp"
#include "abcpet/io.hpp"

namespace abcpet {

InputCurve::InputCurve(InputKind kind, std::function<double(double)> sampler,
                       std::string id)
    : kind_(kind),
      sampler_(std::make_shared<const std::function<double(double)>>(
          std::move(sampler))),
      id_(std::move(id)) {}

FineCurve InputCurve::sample(const TimeGrid& grid) const {
  FineCurve out{grid.fine_step(), std::vector<double>(grid.fine_count())};
  for (std::size_t j = 0; j < out.size(); ++j) out.values[j] = (*this)(grid.fine_time(j));
  return out;
}

InputCurve InputCurve::constant(double value, InputKind kind) {
  char id[64];
  std::snprintf(id, sizeof id, "constant:%.17g", value);
  return InputCurve(kind, [value](double) { return value; }, id);
}

InputCurve InputCurve::exponential(double rate, InputKind kind) {
  char id[64];
  std::snprintf(id, sizeof id, "exponential:%.17g", rate);
  return InputCurve(kind, [rate](double t) { return std::exp(-rate * t); }, id);
}

InputCurve InputCurve::from_samples(InputKind kind, std::vector<double> times,
                                    std::vector<double> values, std::string id) {
  if (times.empty() || times.size() != values.size())
    fail(ErrorCode::FormatError, "input curve needs matching, non-empty samples");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
      fail(ErrorCode::FormatError, "input curve samples must be finite");
    if (values[i] < 0.0)
      fail(ErrorCode::FormatError, "input curve samples must be non-negative");
    if (i > 0 && !(times[i] > times[i - 1]))
      fail(ErrorCode::FormatError, "input curve sample times must increase");
  }
  auto sampler = [t = std::move(times), v = std::move(values)](double x) {
    if (x < t.front()) return 0.0;
    if (x >= t.back()) return v.back();
    const auto hi = std::upper_bound(t.begin(), t.end(), x);
    const auto i = static_cast<std::size_t>(hi - t.begin());
    const double w = (x - t[i - 1]) / (t[i] - t[i - 1]);
    return v[i - 1] + w * (v[i] - v[i - 1]);
  };
  return InputCurve(kind, std::move(sampler), std::move(id));
}

InputCurve reference_input(const ReferenceShape& s) {
  if (s.amplitude < 0 || s.power < 0 || s.fast_rate < 0 || s.slow_weight < 0 ||
      s.slow_rate < 0)
    fail(ErrorCode::InvalidArgument, "reference shape parameters must be non-negative");
  char id[160];
  std::snprintf(id, sizeof id, "builtin:A=%.17g,b=%.17g,c1=%.17g,w=%.17g,c2=%.17g",
                s.amplitude, s.power, s.fast_rate, s.slow_weight, s.slow_rate);
  return InputCurve(
      InputKind::Reference,
      [s](double t) {
        if (s.amplitude == 0.0) return 0.0;
        return s.amplitude * std::pow(t, s.power) *
               (std::exp(-s.fast_rate * t) + s.slow_weight * std::exp(-s.slow_rate * t));
      },
      id);
}

InputCurve reference_input_from_file(const std::filesystem::path& path) {
  const SampledCurve samples = read_sampled_curve_csv(path);
  return InputCurve::from_samples(InputKind::Reference, samples.times,
                                  samples.values, "file:" + samples.digest);
}

}  // namespace abcpet
