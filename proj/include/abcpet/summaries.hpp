#pragma once

// Summary statistics for ABC and their L1 discrepancies.
//   S1  spline-smoothed TAC (GCV natural cubic smoothing spline)
//   S2  raw TAC
//   S3  raw TAC, each frame divided by a Poisson-law scale estimate
//   S4  WLS estimates of (R1, k2, k2a, gamma)

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abcpet/spline.hpp"
#include "abcpet/wls.hpp"

namespace abcpet {

enum class SummaryKind { S1Spline = 0, S2Raw = 1, S3Scaled = 2, S4Wls = 3 };

inline constexpr std::size_t kSummaryKindCount = 4;

std::string_view to_string(SummaryKind kind) noexcept;
// Accepts "S1".."S4" (case-insensitive) and the long names.
SummaryKind parse_summary_kind(std::string_view text);

struct SummaryVector {
  SummaryKind kind = SummaryKind::S2Raw;
  std::vector<double> values;
  // Per-frame divisors, only meaningful on the observed side of an S3
  // comparison.
  std::vector<double> scales;
};

// Read-only inputs some summaries need. Shared across threads.
struct SummaryContext {
  std::shared_ptr<const SmoothingSpline> spline;         // S1
  double s3_scale_hint = 1.0;                            // S3: counts per unit
  std::shared_ptr<const ReferenceColumns> reference;     // S4
  std::vector<ResponseTiming> s4_timings;                // S4 basis library

  // Spline on the grid's frame midpoints plus the reference columns.
  static SummaryContext for_grid(const GridPtr& grid, const InputCurve& cr);
};

SummaryVector spline_smooth(const Tac& tac);
SummaryVector spline_smooth(const Tac& tac, const SmoothingSpline& spline);

// scale_t = sqrt(max(obs_t, floor) / scale_hint).
std::vector<double> s3_scales(std::span<const double> obs, double scale_hint, double floor);
// floor = 1e-3 max(obs) (absolute 1e-3 for all-zero data).
std::vector<double> s3_scales(const Tac& obs, double scale_hint);

// Throws MissingContext for S4 without a reference and timing library.
SummaryVector summarize(const Tac& tac, SummaryKind kind, const SummaryContext& ctx);

// Sum over entries of |sim - obs|, divided by obs.scales for S3. Throws
// KindMismatch on differing kinds or lengths.
double distance(const SummaryVector& obs, const SummaryVector& sim);
double l1_distance(std::span<const double> obs, std::span<const double> sim,
                   std::span<const double> scales = {});

}  // namespace abcpet
