#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace abcpet {

struct SplineFit {
  std::vector<double> fitted;
  double lambda = 0.0;
  double edf = 0.0;  // trace of the smoother matrix
  double gcv = 0.0;
  std::size_t grid_index = 0;
  bool at_boundary = false;  // GCV minimum sits on the end of the lambda grid
};

// Natural cubic smoothing spline with a knot at every abscissa, minimising
//   sum (y_i - f(x_i))^2 + lambda * int f''(x)^2 dx.
//
// The fitted values are (I + lambda K)^{-1} y with K = Q R^{-1} Q^T. K is
// diagonalised once per abscissa set, so each fit costs O(n^2) for the
// projection plus O(n) per candidate lambda.
class SmoothingSpline {
 public:
  static constexpr std::size_t kDefaultGridPoints = 50;

  explicit SmoothingSpline(std::span<const double> x,
                           std::size_t grid_points = kDefaultGridPoints);

  // Lambda chosen by generalized cross-validation over the log grid; ties
  // go to the larger (smoother) lambda. Throws DegenerateFit if no grid
  // point has a finite GCV score.
  SplineFit fit(std::span<const double> y) const;
  SplineFit fit_fixed(std::span<const double> y, double lambda) const;

  std::span<const double> lambda_grid() const noexcept { return lambdas_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues_.size()); }

  // Smoothing penalty matrix K (n x n).
  const Eigen::MatrixXd& penalty() const noexcept { return penalty_; }

 private:
  Eigen::MatrixXd penalty_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::VectorXd eigenvalues_;  // null-space eigenvalues forced to zero
  std::vector<double> lambdas_;
};

}  // namespace abcpet
