#pragma once

// Rejection ABC over a precomputed simulation cache.
//
// The cache holds parameter draws from a uniform sampling box together with
// their noise-free forward TACs and summaries. It is built once and then
// shared read-only: estimating any number of observed TACs from it only
// computes distances, never new forward simulations.

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "abcpet/kinetics.hpp"
#include "abcpet/priors.hpp"
#include "abcpet/summaries.hpp"

namespace abcpet {

struct CacheProvenance {
  std::uint64_t seed = 0;
  UniformBox box;
  std::string reference_id;
  std::string grid_id;
};

class SimCache {
 public:
  SimCache(GridPtr grid, CacheProvenance provenance, std::vector<SummaryKind> kinds,
           std::size_t n);

  std::size_t size() const noexcept { return thetas_.size(); }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  const TimeGrid& grid() const noexcept { return *grid_; }
  const CacheProvenance& provenance() const noexcept { return provenance_; }
  const std::vector<SummaryKind>& kinds() const noexcept { return kinds_; }
  bool has_kind(SummaryKind kind) const noexcept;
  std::size_t summary_length(SummaryKind kind) const noexcept;

  LpNtPetParams theta(std::size_t i) const { return LpNtPetParams::from_array(thetas_[i]); }
  const std::array<double, LpNtPetParams::kSize>& theta_array(std::size_t i) const {
    return thetas_[i];
  }
  std::span<const double> tac(std::size_t i) const;
  // S2 and S3 summaries are the TAC itself.
  std::span<const double> summary(std::size_t i, SummaryKind kind) const;

  std::uint64_t resample_count() const noexcept { return resamples_; }

  // Mutable access for builders and readers.
  void set_entry(std::size_t i, const LpNtPetParams& theta, std::span<const double> tac);
  std::span<double> summary_slot(std::size_t i, SummaryKind kind);
  void set_resample_count(std::uint64_t n) noexcept { resamples_ = n; }

 private:
  GridPtr grid_;
  CacheProvenance provenance_;
  std::vector<SummaryKind> kinds_;
  std::vector<std::array<double, LpNtPetParams::kSize>> thetas_;
  std::vector<double> tacs_;
  std::vector<double> spline_summaries_;
  std::vector<double> wls_summaries_;
  std::uint64_t resamples_ = 0;
};

// n draws from `box` (entry i seeded by derive_seed(seed, i)), forward TACs
// and the requested summaries. A draw whose forward solve hits
// SingularStep is redrawn from the same entry stream, so the cache always
// has exactly n entries.
SimCache build_cache(std::size_t n, const UniformBox& box, const InputCurve& cr,
                     GridPtr grid, std::vector<SummaryKind> kinds, std::uint64_t seed);

// Observed-side summary. S1-S3 compare fixed vectors; S4 re-fits the
// observed TAC at each cache entry's own response timing.
class ObservedSummary {
 public:
  explicit ObservedSummary(SummaryVector summary);
  static ObservedSummary from_tac(const Tac& obs, SummaryKind kind, const SummaryContext& ctx);

  SummaryKind kind() const noexcept { return summary_.kind; }
  const SummaryVector& vector() const noexcept { return summary_; }

  // +inf when the comparison is undefined (rank-deficient S4 fit).
  double distance_to(const SimCache& cache, std::size_t i) const;

 private:
  SummaryVector summary_;
  std::shared_ptr<const WlsProblem> wls_;
};

struct PosteriorSample {
  LpNtPetParams theta;
  double distance = 0.0;
  std::size_t cache_index = 0;
};

struct PosteriorSet {
  std::vector<PosteriorSample> samples;
  double epsilon = 0.0;
  SummaryKind kind = SummaryKind::S1Spline;
  std::string warning;  // set to "EmptyPosterior" when nothing was accepted

  bool empty() const noexcept { return samples.empty(); }
  std::array<double, LpNtPetParams::kSize> mean() const;
};

// Distances from the observed summary to every entry, in cache order.
std::vector<double> all_distances(const SimCache& cache, const ObservedSummary& obs);

// Entries with distance < eps, in cache order; eps = +inf keeps every entry.
PosteriorSet abc_reject(const SimCache& cache, const ObservedSummary& obs, double eps);

// The k smallest distances; ties resolved by cache order. epsilon reports
// the largest retained distance.
PosteriorSet abc_best_k(const SimCache& cache, const ObservedSummary& obs, std::size_t k);

// Nearest-rank q-quantile: the ceil(q n)-th smallest value (at least the first).
double nearest_rank_quantile(std::vector<double> values, double q);
double percentile_tolerance(const SimCache& cache, const ObservedSummary& obs, double q);

// Default tolerance quantile levels and narrowing schedule.
inline constexpr std::array<double, 3> kDefaultToleranceQuantiles = {0.8, 0.02, 0.001};
inline constexpr std::array<double, 3> kDefaultNarrowingSchedule = {200.0, 50.0, 10.0};

// Per parameter, the [min, max] of accepted values intersected with the
// prior; tP is narrowed on its conditional fraction scale. Throws
// EmptyPosterior.
UniformBox narrow_ranges(const UniformBox& box, const PosteriorSet& posterior,
                         const UniformBox& priors);

struct NarrowingStep {
  double epsilon = 0.0;
  UniformBox sampling_box;  // box the step's cache was drawn from
  UniformBox narrowed_box;
  std::size_t accepted = 0;
  std::size_t cache_size = 0;
};

// Repeats build_cache / abc_reject / narrow_ranges down the schedule,
// starting from the priors. Step j uses cache seed derive_seed(seed, j).
// A step that accepts nothing is recorded with accepted = 0 and its
// sampling box unchanged, and ends the schedule.
std::vector<NarrowingStep> narrow_schedule(const Tac& obs, SummaryKind kind,
                                           const UniformBox& priors,
                                           std::span<const double> schedule,
                                           std::size_t cache_size, const InputCurve& cr,
                                           std::uint64_t seed, double s3_scale_hint = 1.0);

}  // namespace abcpet
