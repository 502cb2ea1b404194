#include "abcpet/wls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "abcpet/error.hpp"
#include "abcpet/rng.hpp"

namespace abcpet {

namespace {

constexpr double kConditionLimit = 1e12;
constexpr int kMaxNonnegPasses = 20;

double weighted_rss(const Eigen::MatrixXd& A, std::span<const double> w,
                    std::span<const double> y, const Eigen::VectorXd& x) {
  const Eigen::VectorXd fitted = A * x;
  double rss = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double r = y[static_cast<std::size_t>(i)] - fitted(i);
    rss += w[static_cast<std::size_t>(i)] * r * r;
  }
  return rss;
}

// Clamp-and-resolve loop on the active column set.
Eigen::VectorXd solve_nonneg(const Eigen::MatrixXd& A, std::span<const double> w,
                             std::span<const double> y) {
  const Eigen::Index p = A.cols();
  std::vector<Eigen::Index> free_cols(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) free_cols[static_cast<std::size_t>(j)] = j;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
  for (int pass = 0; pass < kMaxNonnegPasses && !free_cols.empty(); ++pass) {
    Eigen::MatrixXd sub(A.rows(), static_cast<Eigen::Index>(free_cols.size()));
    for (std::size_t j = 0; j < free_cols.size(); ++j)
      sub.col(static_cast<Eigen::Index>(j)) = A.col(free_cols[j]);
    const Eigen::VectorXd xs = wls_solve(sub, w, y);

    x.setZero();
    std::vector<Eigen::Index> still_free;
    for (std::size_t j = 0; j < free_cols.size(); ++j) {
      const double v = xs(static_cast<Eigen::Index>(j));
      if (v >= 0.0) {
        x(free_cols[j]) = v;
        still_free.push_back(free_cols[j]);
      }
    }
    if (still_free.size() == free_cols.size()) return x;
    free_cols = std::move(still_free);
    x.setZero();
  }
  return x;
}

}  // namespace

double variance_floor(std::span<const double> obs) {
  double max_v = 0.0;
  for (double v : obs) max_v = std::max(max_v, v);
  // All-zero data would give a zero floor; fall back to an absolute one.
  return max_v > 0.0 ? 1e-3 * max_v : 1e-3;
}

std::vector<double> weights_from(std::span<const double> obs) {
  const double floor = variance_floor(obs);
  std::vector<double> w(obs.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / std::max(obs[i], floor);
  return w;
}

std::vector<double> weights_from(const Tac& obs) { return weights_from(obs.values()); }

Eigen::VectorXd wls_solve(const Eigen::MatrixXd& A, std::span<const double> w,
                          std::span<const double> y) {
  const Eigen::Index m = A.rows();
  const Eigen::Index p = A.cols();
  if (static_cast<Eigen::Index>(w.size()) != m || static_cast<Eigen::Index>(y.size()) != m)
    fail(ErrorCode::InvalidArgument, "weights and data must match the design rows");
  if (p == 0 || m < p) fail(ErrorCode::RankDeficient, "design has fewer rows than columns");

  Eigen::MatrixXd B(m, p);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double wi = w[static_cast<std::size_t>(i)];
    if (!(wi > 0.0) || !std::isfinite(wi))
      fail(ErrorCode::InvalidArgument, "weights must be positive and finite");
    const double s = std::sqrt(wi);
    B.row(i) = s * A.row(i);
    rhs(i) = s * y[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd scale(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    scale(j) = B.col(j).norm();
    if (!(scale(j) > 0.0) || !std::isfinite(scale(j)))
      fail(ErrorCode::RankDeficient, "design has a zero or non-finite column");
    B.col(j) /= scale(j);
  }

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
  const auto& sv = svd.singularValues();
  const double smin = sv(p - 1);
  if (!(smin > 0.0) || (sv(0) / smin) * (sv(0) / smin) > kConditionLimit)
    fail(ErrorCode::RankDeficient, "weighted Gram matrix is singular to working precision");

  Eigen::VectorXd x = qr.solve(rhs);
  return x.cwiseQuotient(scale);
}

ReferenceColumns::ReferenceColumns(const InputCurve& cr, GridPtr grid)
    : grid_(std::move(grid)), cr_id_(cr.id()) {
  const FineCurve fine = cr.sample(*grid_);
  const FineCurve running = cum_integral(fine);
  const Eigen::Index n = static_cast<Eigen::Index>(grid_->frame_count());
  cr_mid_.resize(n);
  cr_int_mid_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = grid_->midpoint(static_cast<std::size_t>(i));
    cr_mid_(i) = cr(t);
    cr_int_mid_(i) = integral_to(fine, running, t);
  }
}

WlsProblem::WlsProblem(const ReferenceColumns& ref, const Tac& obs)
    : ref_(ref), weights_(weights_from(obs)) {
  const TimeGrid& grid = ref_.grid();
  if (!grid.same_frames(obs.grid()))
    fail(ErrorCode::GridMismatch, "observed TAC frames differ from the reference grid");
  const std::size_t n = obs.size();
  y_ = Eigen::Map<const Eigen::VectorXd>(obs.values().data(), static_cast<Eigen::Index>(n));

  // Piecewise-linear observed curve through (0, 0) and the frame midpoints.
  obs_fine_ = FineCurve{grid.fine_step(), std::vector<double>(grid.fine_count())};
  std::size_t seg = 0;
  for (std::size_t j = 0; j < obs_fine_.size(); ++j) {
    const double t = grid.fine_time(j);
    while (seg < n && grid.midpoint(seg) < t) ++seg;
    double v;
    if (seg == n) {
      v = obs[n - 1];
    } else {
      const double t1 = grid.midpoint(seg);
      const double v1 = obs[seg];
      const double t0 = seg == 0 ? 0.0 : grid.midpoint(seg - 1);
      const double v0 = seg == 0 ? 0.0 : obs[seg - 1];
      v = t1 > t0 ? v0 + (t - t0) / (t1 - t0) * (v1 - v0) : v1;
    }
    obs_fine_.values[j] = v;
  }
  const FineCurve running = cum_integral(obs_fine_);
  obs_int_mid_.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    obs_int_mid_(static_cast<Eigen::Index>(i)) =
        integral_to(obs_fine_, running, grid.midpoint(i));
}

Eigen::VectorXd WlsProblem::response_column(const ResponseTiming& timing) const {
  const TimeGrid& grid = ref_.grid();
  FineCurve product{obs_fine_.step, std::vector<double>(obs_fine_.size(), 0.0)};
  // h vanishes up to tD, so start at the first fine point past it.
  std::size_t first = 0;
  if (timing.tD > 0.0)
    first = static_cast<std::size_t>(std::floor(timing.tD / obs_fine_.step));
  for (std::size_t j = first; j < product.size(); ++j)
    product.values[j] = obs_fine_.values[j] * response_h(timing, obs_fine_.time(j));
  const FineCurve running = cum_integral(product);
  Eigen::VectorXd col(static_cast<Eigen::Index>(grid.frame_count()));
  for (std::size_t i = 0; i < grid.frame_count(); ++i)
    col(static_cast<Eigen::Index>(i)) = -integral_to(product, running, grid.midpoint(i));
  return col;
}

DesignMatrix WlsProblem::design_with(const Eigen::VectorXd& response_column) const {
  DesignMatrix A(y_.size(), 4);
  A.col(0) = ref_.reference();
  A.col(1) = ref_.reference_integral();
  A.col(2) = -obs_int_mid_;
  A.col(3) = response_column;
  return A;
}

DesignMatrix WlsProblem::design(const ResponseTiming& timing) const {
  return design_with(response_column(timing));
}

WlsFit WlsProblem::solve_column(const Eigen::VectorXd& response_column, bool nonneg) const {
  const Eigen::MatrixXd A = design_with(response_column);
  const std::span<const double> y(y_.data(), static_cast<std::size_t>(y_.size()));
  WlsFit fit;
  const Eigen::VectorXd x = nonneg ? solve_nonneg(A, weights_, y) : wls_solve(A, weights_, y);
  fit.estimate = x;
  fit.weighted_rss = weighted_rss(A, weights_, y, x);
  return fit;
}

WlsFit WlsProblem::solve(const ResponseTiming& timing, bool nonneg) const {
  WlsFit fit = solve_column(response_column(timing), nonneg);
  fit.timing = timing;
  return fit;
}

DesignMatrix design_matrix(const InputCurve& cr, const Tac& ct_obs,
                           const ResponseTiming& timing) {
  const ReferenceColumns ref(cr, ct_obs.grid_ptr());
  return WlsProblem(ref, ct_obs).design(timing);
}

BasisLibrary build_basis_library(const ReferenceColumns& ref, const Tac& obs,
                                 std::vector<ResponseTiming> timings) {
  if (timings.empty()) fail(ErrorCode::InvalidArgument, "basis library needs at least one timing");
  const WlsProblem problem(ref, obs);
  const DesignMatrix base = problem.design_with(Eigen::VectorXd::Zero(problem.y().size()));

  BasisLibrary lib;
  lib.fixed = base.leftCols(3);
  lib.columns.resize(base.rows(), static_cast<Eigen::Index>(timings.size()));
  for (std::size_t i = 0; i < timings.size(); ++i) {
    timings[i].validate();
    lib.columns.col(static_cast<Eigen::Index>(i)) = problem.response_column(timings[i]);
  }
  lib.timings = std::move(timings);
  lib.reference_id = ref.reference_id();
  lib.grid_id = ref.grid().id();
  return lib;
}

WlsFit wls_fit_grid(const Tac& obs, const BasisLibrary& lib, bool nonneg) {
  if (lib.timings.empty()) fail(ErrorCode::InvalidArgument, "basis library is empty");
  const auto rows = static_cast<Eigen::Index>(obs.size());
  if (lib.fixed.rows() != rows || lib.columns.rows() != rows ||
      lib.columns.cols() != static_cast<Eigen::Index>(lib.timings.size()))
    fail(ErrorCode::GridMismatch, "basis library does not match the observed TAC");

  const std::vector<double> w = weights_from(obs);
  const std::span<const double> y = obs.values();
  Eigen::MatrixXd A(rows, 4);
  A.leftCols(3) = lib.fixed;

  WlsFit best;
  best.weighted_rss = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < lib.timings.size(); ++i) {
    A.col(3) = lib.columns.col(static_cast<Eigen::Index>(i));
    Eigen::VectorXd x;
    try {
      x = nonneg ? solve_nonneg(A, w, y) : wls_solve(A, w, y);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::RankDeficient) continue;
      throw;
    }
    const double rss = weighted_rss(A, w, y, x);
    if (!found || rss < best.weighted_rss) {
      best.estimate = x;
      best.timing = lib.timings[i];
      best.weighted_rss = rss;
      best.library_index = i;
      found = true;
    }
  }
  if (!found) fail(ErrorCode::NoValidFit, "every timing in the basis library is rank deficient");
  return best;
}

std::vector<ResponseTiming> sample_timing_library(std::size_t n, const UniformBox& priors,
                                                  std::uint64_t seed) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "timing library size must be >= 1");
  priors.validate();
  Rng rng(seed);
  std::vector<ResponseTiming> out(n);
  const Interval& u = priors.ranges[UniformBox::kTp];
  for (ResponseTiming& t : out) {
    t.tD = uniform(rng, priors.ranges[4].lo, priors.ranges[4].hi);
    t.tP = priors.tp_from_fraction(t.tD, u.hi - uniform(rng, 0.0, 1.0) * (u.hi - u.lo));
    t.alpha = uniform(rng, priors.ranges[6].lo, priors.ranges[6].hi);
  }
  return out;
}

}  // namespace abcpet
