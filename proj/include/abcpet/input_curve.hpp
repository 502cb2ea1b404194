#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "abcpet/signal.hpp"

namespace abcpet {

enum class InputKind { Arterial, Reference };

// Shape of the built-in reference-region curve
//   C_R(t) = amplitude * t^power * (exp(-fast_rate t) + slow_weight * exp(-slow_rate t)).
struct ReferenceShape {
  double amplitude = 1.0;
  double power = 1.0;
  double fast_rate = 0.12;
  double slow_weight = 0.3;
  double slow_rate = 0.02;
};

// Continuous-time, causal driving curve: zero for t < 0. Immutable and
// cheap to copy.
class InputCurve {
 public:
  InputCurve(InputKind kind, std::function<double(double)> sampler,
             std::string id);

  double operator()(double t) const { return t < 0.0 ? 0.0 : (*sampler_)(t); }

  InputKind kind() const noexcept { return kind_; }
  const std::string& id() const noexcept { return id_; }

  // Values at the fine-grid points of `grid`.
  FineCurve sample(const TimeGrid& grid) const;

  static InputCurve constant(double value, InputKind kind = InputKind::Arterial);
  static InputCurve exponential(double rate, InputKind kind = InputKind::Arterial);

  // Linear interpolation between (t, value) samples, zero before the first
  // sample and held at the last value after the final one.
  static InputCurve from_samples(InputKind kind, std::vector<double> times,
                                 std::vector<double> values, std::string id);

 private:
  InputKind kind_;
  std::shared_ptr<const std::function<double(double)>> sampler_;
  std::string id_;
};

InputCurve reference_input(const ReferenceShape& shape = {});

// Accepts either `t,value` pairs or the TAC layout `t_start,t_end,value`
// (samples taken at frame midpoints). Throws FormatError on malformed input.
InputCurve reference_input_from_file(const std::filesystem::path& path);

}  // namespace abcpet
