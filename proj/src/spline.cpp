#include "abcpet/spline.hpp"

#include <cmath>
#include <limits>

#include "abcpet/error.hpp"

namespace abcpet {

namespace {

// Second-difference operator Q (n x n-2) and band matrix R (n-2 x n-2) of
// the natural cubic spline roughness penalty.
Eigen::MatrixXd roughness_penalty(std::span<const double> x) {
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Eigen::VectorXd h(n - 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) h(i) = x[i + 1] - x[i];

  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n - 2);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n - 2, n - 2);
  for (Eigen::Index j = 0; j < n - 2; ++j) {
    Q(j, j) = 1.0 / h(j);
    Q(j + 1, j) = -1.0 / h(j) - 1.0 / h(j + 1);
    Q(j + 2, j) = 1.0 / h(j + 1);
    R(j, j) = (h(j) + h(j + 1)) / 3.0;
    if (j + 1 < n - 2) {
      R(j, j + 1) = h(j + 1) / 6.0;
      R(j + 1, j) = h(j + 1) / 6.0;
    }
  }
  const Eigen::MatrixXd RinvQt = R.llt().solve(Q.transpose());
  Eigen::MatrixXd K = Q * RinvQt;
  return 0.5 * (K + K.transpose());
}

}  // namespace

SmoothingSpline::SmoothingSpline(std::span<const double> x, std::size_t grid_points) {
  if (x.size() < 8)
    fail(ErrorCode::InvalidArgument, "smoothing spline needs at least 8 points");
  if (grid_points < 2)
    fail(ErrorCode::InvalidArgument, "lambda grid needs at least 2 points");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1]))
      fail(ErrorCode::InvalidArgument, "spline abscissae must be strictly increasing");

  penalty_ = roughness_penalty(x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(penalty_);
  eigenvectors_ = eig.eigenvectors();
  eigenvalues_ = eig.eigenvalues();

  // Linear functions span the exact null space of K; round-off leaves
  // those eigenvalues at ~1e-16 relative, which would otherwise shrink
  // straight lines under very large lambda.
  const double d_max = eigenvalues_.maxCoeff();
  double d_min_pos = d_max;
  for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k) {
    if (eigenvalues_(k) < 1e-10 * d_max) {
      eigenvalues_(k) = 0.0;
    } else {
      d_min_pos = std::min(d_min_pos, eigenvalues_(k));
    }
  }

  // From near-interpolation (lambda d_max = 1e-2) to near-linear
  // (lambda d_min = 1e2), evenly spaced in log lambda.
  const double lo = std::log(1e-2 / d_max);
  const double hi = std::log(1e2 / d_min_pos);
  lambdas_.resize(grid_points);
  for (std::size_t j = 0; j < grid_points; ++j)
    lambdas_[j] = std::exp(lo + (hi - lo) * static_cast<double>(j) /
                                    static_cast<double>(grid_points - 1));
}

SplineFit SmoothingSpline::fit(std::span<const double> y) const {
  const Eigen::Index n = eigenvalues_.size();
  if (static_cast<Eigen::Index>(y.size()) != n)
    fail(ErrorCode::InvalidArgument, "spline data length does not match abscissae");
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const Eigen::VectorXd z = eigenvectors_.transpose() * yv;
  const Eigen::VectorXd z2 = z.array().square();
  const double dn = static_cast<double>(n);

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_j = lambdas_.size();
  for (std::size_t j = 0; j < lambdas_.size(); ++j) {
    const double lambda = lambdas_[j];
    double rss = 0.0;
    double trace = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double shrink = 1.0 / (1.0 + lambda * eigenvalues_(k));
      const double resid = 1.0 - shrink;
      rss += resid * resid * z2(k);
      trace += shrink;
    }
    const double denom = 1.0 - trace / dn;
    const double score = (rss / dn) / (denom * denom);
    if (std::isfinite(score) && score <= best) {
      best = score;
      best_j = j;
    }
  }
  if (best_j == lambdas_.size())
    fail(ErrorCode::DegenerateFit, "no smoothing parameter has a finite GCV score");

  SplineFit out = fit_fixed(y, lambdas_[best_j]);
  out.gcv = best;
  out.grid_index = best_j;
  out.at_boundary = best_j == 0 || best_j + 1 == lambdas_.size();
  return out;
}

SplineFit SmoothingSpline::fit_fixed(std::span<const double> y, double lambda) const {
  const Eigen::Index n = eigenvalues_.size();
  if (static_cast<Eigen::Index>(y.size()) != n)
    fail(ErrorCode::InvalidArgument, "spline data length does not match abscissae");
  if (!(lambda >= 0.0)) fail(ErrorCode::InvalidArgument, "lambda must be >= 0");
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  Eigen::VectorXd z = eigenvectors_.transpose() * yv;
  double trace = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double shrink = 1.0 / (1.0 + lambda * eigenvalues_(k));
    z(k) *= shrink;
    trace += shrink;
  }
  const Eigen::VectorXd fitted = eigenvectors_ * z;

  SplineFit out;
  out.fitted.assign(fitted.data(), fitted.data() + n);
  out.lambda = lambda;
  out.edf = trace;
  const double rss = (yv - fitted).squaredNorm();
  const double denom = 1.0 - trace / static_cast<double>(n);
  out.gcv = (rss / static_cast<double>(n)) / (denom * denom);
  return out;
}

}  // namespace abcpet
