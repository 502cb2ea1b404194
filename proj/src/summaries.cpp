#include "abcpet/summaries.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "abcpet/error.hpp"

namespace abcpet {

std::string_view to_string(SummaryKind kind) noexcept {
  switch (kind) {
    case SummaryKind::S1Spline: return "S1";
    case SummaryKind::S2Raw: return "S2";
    case SummaryKind::S3Scaled: return "S3";
    case SummaryKind::S4Wls: return "S4";
  }
  return "?";
}

SummaryKind parse_summary_kind(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "s1" || s == "spline") return SummaryKind::S1Spline;
  if (s == "s2" || s == "raw") return SummaryKind::S2Raw;
  if (s == "s3" || s == "scaled") return SummaryKind::S3Scaled;
  if (s == "s4" || s == "wls") return SummaryKind::S4Wls;
  fail(ErrorCode::InvalidArgument, "unknown summary kind '" + std::string(text) + "'");
}

SummaryContext SummaryContext::for_grid(const GridPtr& grid, const InputCurve& cr) {
  SummaryContext ctx;
  const std::vector<double> mids = grid->midpoints();
  ctx.spline = std::make_shared<const SmoothingSpline>(mids);
  ctx.reference = std::make_shared<const ReferenceColumns>(cr, grid);
  return ctx;
}

SummaryVector spline_smooth(const Tac& tac, const SmoothingSpline& spline) {
  SplineFit fit = spline.fit(tac.values());
  return {SummaryKind::S1Spline, std::move(fit.fitted), {}};
}

SummaryVector spline_smooth(const Tac& tac) {
  const std::vector<double> mids = tac.grid().midpoints();
  return spline_smooth(tac, SmoothingSpline(mids));
}

std::vector<double> s3_scales(std::span<const double> obs, double scale_hint, double floor) {
  if (!(scale_hint > 0.0)) fail(ErrorCode::InvalidArgument, "S3 scale hint must be positive");
  if (!(floor > 0.0)) fail(ErrorCode::InvalidArgument, "S3 floor must be positive");
  std::vector<double> out(obs.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::sqrt(std::max(obs[i], floor) / scale_hint);
  return out;
}

std::vector<double> s3_scales(const Tac& obs, double scale_hint) {
  return s3_scales(obs.values(), scale_hint, variance_floor(obs.values()));
}

SummaryVector summarize(const Tac& tac, SummaryKind kind, const SummaryContext& ctx) {
  const auto raw = tac.values();
  switch (kind) {
    case SummaryKind::S1Spline:
      return ctx.spline ? spline_smooth(tac, *ctx.spline) : spline_smooth(tac);
    case SummaryKind::S2Raw:
      return {kind, {raw.begin(), raw.end()}, {}};
    case SummaryKind::S3Scaled:
      return {kind, {raw.begin(), raw.end()}, s3_scales(tac, ctx.s3_scale_hint)};
    case SummaryKind::S4Wls: {
      if (!ctx.reference || ctx.s4_timings.empty())
        fail(ErrorCode::MissingContext, "S4 summary needs a reference curve and timing library");
      const BasisLibrary lib = build_basis_library(*ctx.reference, tac, ctx.s4_timings);
      const WlsFit fit = wls_fit_grid(tac, lib, false);
      return {kind, {fit.estimate(0), fit.estimate(1), fit.estimate(2), fit.estimate(3)}, {}};
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown summary kind");
}

double l1_distance(std::span<const double> obs, std::span<const double> sim,
                   std::span<const double> scales) {
  if (obs.size() != sim.size())
    fail(ErrorCode::KindMismatch, "summary vectors differ in length");
  if (!scales.empty() && scales.size() != obs.size())
    fail(ErrorCode::KindMismatch, "scale vector differs in length");
  double d = 0.0;
  if (scales.empty()) {
    for (std::size_t i = 0; i < obs.size(); ++i) d += std::abs(sim[i] - obs[i]);
  } else {
    for (std::size_t i = 0; i < obs.size(); ++i) d += std::abs(sim[i] - obs[i]) / scales[i];
  }
  return d;
}

double distance(const SummaryVector& obs, const SummaryVector& sim) {
  if (obs.kind != sim.kind) fail(ErrorCode::KindMismatch, "summary kinds differ");
  if (obs.kind == SummaryKind::S3Scaled) return l1_distance(obs.values, sim.values, obs.scales);
  return l1_distance(obs.values, sim.values);
}

}  // namespace abcpet
