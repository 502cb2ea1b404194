#include "abcpet/abc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "abcpet/error.hpp"
#include "abcpet/parallel.hpp"
#include "abcpet/rng.hpp"

namespace abcpet {

namespace {

constexpr std::size_t kMaxRedraws = 10000;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sanitize(double d) { return std::isnan(d) ? kInf : d; }

}  // namespace

SimCache::SimCache(GridPtr grid, CacheProvenance provenance, std::vector<SummaryKind> kinds,
                   std::size_t n)
    : grid_(std::move(grid)), provenance_(std::move(provenance)), kinds_(std::move(kinds)) {
  std::sort(kinds_.begin(), kinds_.end());
  kinds_.erase(std::unique(kinds_.begin(), kinds_.end()), kinds_.end());
  const std::size_t frames = grid_->frame_count();
  thetas_.resize(n);
  tacs_.assign(n * frames, 0.0);
  if (has_kind(SummaryKind::S1Spline)) spline_summaries_.assign(n * frames, 0.0);
  if (has_kind(SummaryKind::S4Wls)) wls_summaries_.assign(n * 4, 0.0);
}

bool SimCache::has_kind(SummaryKind kind) const noexcept {
  return std::find(kinds_.begin(), kinds_.end(), kind) != kinds_.end();
}

std::size_t SimCache::summary_length(SummaryKind kind) const noexcept {
  return kind == SummaryKind::S4Wls ? 4 : grid_->frame_count();
}

std::span<const double> SimCache::tac(std::size_t i) const {
  const std::size_t f = grid_->frame_count();
  return {tacs_.data() + i * f, f};
}

std::span<const double> SimCache::summary(std::size_t i, SummaryKind kind) const {
  if (!has_kind(kind))
    fail(ErrorCode::KindMismatch,
         "cache has no " + std::string(to_string(kind)) + " summaries");
  const std::size_t f = grid_->frame_count();
  switch (kind) {
    case SummaryKind::S1Spline: return {spline_summaries_.data() + i * f, f};
    case SummaryKind::S4Wls: return {wls_summaries_.data() + i * 4, 4};
    default: return tac(i);
  }
}

void SimCache::set_entry(std::size_t i, const LpNtPetParams& theta,
                         std::span<const double> tac) {
  const std::size_t f = grid_->frame_count();
  if (tac.size() != f) fail(ErrorCode::InvalidArgument, "cache TAC length mismatch");
  thetas_[i] = theta.to_array();
  std::copy(tac.begin(), tac.end(), tacs_.begin() + static_cast<std::ptrdiff_t>(i * f));
}

std::span<double> SimCache::summary_slot(std::size_t i, SummaryKind kind) {
  const std::size_t f = grid_->frame_count();
  switch (kind) {
    case SummaryKind::S1Spline: return {spline_summaries_.data() + i * f, f};
    case SummaryKind::S4Wls: return {wls_summaries_.data() + i * 4, 4};
    default: return {tacs_.data() + i * f, f};
  }
}

SimCache build_cache(std::size_t n, const UniformBox& box, const InputCurve& cr,
                     GridPtr grid, std::vector<SummaryKind> kinds, std::uint64_t seed) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "cache size must be >= 1");
  box.validate();
  CacheProvenance prov{seed, box, cr.id(), grid->id()};
  SimCache cache(grid, std::move(prov), std::move(kinds), n);

  const LpNtPetSimulator sim(cr, grid);
  const bool want_s1 = cache.has_kind(SummaryKind::S1Spline);
  const bool want_s4 = cache.has_kind(SummaryKind::S4Wls);
  std::shared_ptr<const SmoothingSpline> spline;
  std::shared_ptr<const ReferenceColumns> ref;
  if (want_s1) spline = std::make_shared<const SmoothingSpline>(grid->midpoints());
  if (want_s4) ref = std::make_shared<const ReferenceColumns>(cr, grid);

  std::vector<std::uint64_t> redraws(n, 0);
  parallel_for(n, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    for (;;) {
      const LpNtPetParams theta = box.sample(rng);
      try {
        const Tac tac = sim.simulate(theta);
        cache.set_entry(i, theta, tac.values());
        if (want_s1) {
          const SplineFit fit = spline->fit(tac.values());
          std::ranges::copy(fit.fitted, cache.summary_slot(i, SummaryKind::S1Spline).begin());
        }
        if (want_s4) {
          auto slot = cache.summary_slot(i, SummaryKind::S4Wls);
          try {
            const WlsFit fit = WlsProblem(*ref, tac).solve(theta.timing, false);
            for (int c = 0; c < 4; ++c) slot[static_cast<std::size_t>(c)] = fit.estimate(c);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::RankDeficient) throw;
            std::ranges::fill(slot, std::numeric_limits<double>::quiet_NaN());
          }
        }
        return;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularStep) throw;
        if (++redraws[i] > kMaxRedraws)
          fail(ErrorCode::SingularStep, "sampling box yields only singular forward solves");
      }
    }
  });
  cache.set_resample_count(std::accumulate(redraws.begin(), redraws.end(), std::uint64_t{0}));
  return cache;
}

ObservedSummary::ObservedSummary(SummaryVector summary) : summary_(std::move(summary)) {}

ObservedSummary ObservedSummary::from_tac(const Tac& obs, SummaryKind kind,
                                          const SummaryContext& ctx) {
  if (kind != SummaryKind::S4Wls) return ObservedSummary(summarize(obs, kind, ctx));
  if (!ctx.reference)
    fail(ErrorCode::MissingContext, "S4 comparison needs the reference columns");
  ObservedSummary out(SummaryVector{kind, {}, {}});
  out.wls_ = std::make_shared<const WlsProblem>(*ctx.reference, obs);
  return out;
}

double ObservedSummary::distance_to(const SimCache& cache, std::size_t i) const {
  const auto sim = cache.summary(i, summary_.kind);
  if (wls_) {
    try {
      const WlsFit fit = wls_->solve(cache.theta(i).timing, false);
      const double obs[4] = {fit.estimate(0), fit.estimate(1), fit.estimate(2), fit.estimate(3)};
      return sanitize(l1_distance(obs, sim));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::RankDeficient) return kInf;
      throw;
    }
  }
  if (summary_.kind == SummaryKind::S3Scaled)
    return sanitize(l1_distance(summary_.values, sim, summary_.scales));
  return sanitize(l1_distance(summary_.values, sim));
}

std::array<double, LpNtPetParams::kSize> PosteriorSet::mean() const {
  std::array<double, LpNtPetParams::kSize> m{};
  if (samples.empty()) fail(ErrorCode::EmptyPosterior, "posterior is empty");
  for (const auto& s : samples) {
    const auto a = s.theta.to_array();
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += a[j];
  }
  for (double& v : m) v /= static_cast<double>(samples.size());
  return m;
}

std::vector<double> all_distances(const SimCache& cache, const ObservedSummary& obs) {
  if (!cache.has_kind(obs.kind()))
    fail(ErrorCode::KindMismatch,
         "cache has no " + std::string(to_string(obs.kind())) + " summaries");
  std::vector<double> d(cache.size());
  parallel_for(cache.size(), [&](std::size_t i) { d[i] = obs.distance_to(cache, i); });
  return d;
}

PosteriorSet abc_reject(const SimCache& cache, const ObservedSummary& obs, double eps) {
  const std::vector<double> d = all_distances(cache, obs);
  PosteriorSet out;
  out.epsilon = eps;
  out.kind = obs.kind();
  const bool accept_all = eps == kInf;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (accept_all || d[i] < eps) out.samples.push_back({cache.theta(i), d[i], i});
  if (out.samples.empty()) out.warning = "EmptyPosterior";
  return out;
}

PosteriorSet abc_best_k(const SimCache& cache, const ObservedSummary& obs, std::size_t k) {
  if (k == 0 || k > cache.size())
    fail(ErrorCode::InvalidArgument, "best-k needs 1 <= k <= cache size");
  const std::vector<double> d = all_distances(cache, obs);
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&d](std::size_t a, std::size_t b) {
                      return d[a] < d[b] || (d[a] == d[b] && a < b);
                    });
  PosteriorSet out;
  out.kind = obs.kind();
  out.samples.reserve(k);
  for (std::size_t j = 0; j < k; ++j) out.samples.push_back({cache.theta(idx[j]), d[idx[j]], idx[j]});
  out.epsilon = out.samples.back().distance;
  return out;
}

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "quantile of an empty set");
  if (!(q > 0.0 && q <= 1.0)) fail(ErrorCode::InvalidArgument, "quantile level must be in (0, 1]");
  const double n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  const auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

double percentile_tolerance(const SimCache& cache, const ObservedSummary& obs, double q) {
  return nearest_rank_quantile(all_distances(cache, obs), q);
}

UniformBox narrow_ranges(const UniformBox& box, const PosteriorSet& posterior,
                         const UniformBox& priors) {
  if (posterior.empty()) fail(ErrorCode::EmptyPosterior, "cannot narrow on an empty posterior");
  UniformBox out = box;
  for (std::size_t j = 0; j < LpNtPetParams::kSize; ++j) {
    double lo = kInf;
    double hi = -kInf;
    for (const auto& s : posterior.samples) {
      const double v = j == UniformBox::kTp ? box.tp_fraction(s.theta) : s.theta.to_array()[j];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const Interval& prior = priors.ranges[j];
    lo = std::clamp(lo, prior.lo, prior.hi);
    hi = std::clamp(hi, prior.lo, prior.hi);
    out.ranges[j] = {lo, hi};
  }
  return out;
}

std::vector<NarrowingStep> narrow_schedule(const Tac& obs, SummaryKind kind,
                                           const UniformBox& priors,
                                           std::span<const double> schedule,
                                           std::size_t cache_size, const InputCurve& cr,
                                           std::uint64_t seed, double s3_scale_hint) {
  SummaryContext ctx = SummaryContext::for_grid(obs.grid_ptr(), cr);
  ctx.s3_scale_hint = s3_scale_hint;
  const ObservedSummary observed = ObservedSummary::from_tac(obs, kind, ctx);

  std::vector<NarrowingStep> steps;
  UniformBox box = priors;
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    const SimCache cache =
        build_cache(cache_size, box, cr, obs.grid_ptr(), {kind}, derive_seed(seed, j));
    const PosteriorSet post = abc_reject(cache, observed, schedule[j]);
    NarrowingStep step;
    step.epsilon = schedule[j];
    step.sampling_box = box;
    step.narrowed_box = post.empty() ? box : narrow_ranges(box, post, priors);
    step.accepted = post.samples.size();
    step.cache_size = cache.size();
    box = step.narrowed_box;
    steps.push_back(step);
    if (post.empty()) break;
  }
  return steps;
}

}  // namespace abcpet
