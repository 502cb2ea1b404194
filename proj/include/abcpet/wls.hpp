#pragma once

// Basis-function weighted least squares for lp-ntPET.
//
// For a fixed response timing the operational equation is linear in
// (R1, k2, k2a, gamma):
//   y = [C_R, int C_R, -int C_t, -int C_t h] x
// where every C_t integral uses the observed TAC. Scanning a library of
// timings and keeping the smallest weighted RSS gives the point estimate.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "abcpet/input_curve.hpp"
#include "abcpet/kinetics.hpp"
#include "abcpet/priors.hpp"
#include "abcpet/signal.hpp"

namespace abcpet {

using DesignMatrix = Eigen::Matrix<double, Eigen::Dynamic, 4>;

struct WlsFit {
  Eigen::Vector4d estimate = Eigen::Vector4d::Zero();  // R1, k2, k2a, gamma
  ResponseTiming timing;
  double weighted_rss = 0.0;
  std::size_t library_index = 0;

  LpNtPetParams params() const {
    return {estimate(0), estimate(1), estimate(2), estimate(3), timing};
  }
};

// Timing-independent columns C_R(t_mid) and int_0^t_mid C_R, computed once
// per reference curve and grid.
class ReferenceColumns {
 public:
  ReferenceColumns(const InputCurve& cr, GridPtr grid);

  const GridPtr& grid_ptr() const noexcept { return grid_; }
  const TimeGrid& grid() const noexcept { return *grid_; }
  const Eigen::VectorXd& reference() const noexcept { return cr_mid_; }
  const Eigen::VectorXd& reference_integral() const noexcept { return cr_int_mid_; }
  const std::string& reference_id() const noexcept { return cr_id_; }

 private:
  GridPtr grid_;
  Eigen::VectorXd cr_mid_;
  Eigen::VectorXd cr_int_mid_;
  std::string cr_id_;
};

// Everything about one observed TAC that the per-timing solves share: the
// observed curve linearly interpolated onto the fine grid (anchored at
// (0, 0) and held after the last frame midpoint), its running integral at
// the frame midpoints, and the weights.
class WlsProblem {
 public:
  WlsProblem(const ReferenceColumns& ref, const Tac& obs);

  const Eigen::VectorXd& y() const noexcept { return y_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  // -int_0^t_mid C_obs(u) h(u) du for each frame.
  Eigen::VectorXd response_column(const ResponseTiming& timing) const;
  DesignMatrix design(const ResponseTiming& timing) const;
  DesignMatrix design_with(const Eigen::VectorXd& response_column) const;

  // Weighted LS at one timing. Throws RankDeficient.
  WlsFit solve(const ResponseTiming& timing, bool nonneg) const;
  WlsFit solve_column(const Eigen::VectorXd& response_column, bool nonneg) const;

 private:
  ReferenceColumns ref_;
  Eigen::VectorXd y_;
  std::vector<double> weights_;
  FineCurve obs_fine_;
  Eigen::VectorXd obs_int_mid_;
};

DesignMatrix design_matrix(const InputCurve& cr, const Tac& ct_obs,
                           const ResponseTiming& timing);

// Weighted LS solution of A x = y via Householder QR of W^{1/2} A after
// column equilibration. Throws RankDeficient if the weighted Gram matrix
// has condition number above 1e12 (or a zero column).
Eigen::VectorXd wls_solve(const Eigen::MatrixXd& A, std::span<const double> w,
                          std::span<const double> y);

// w_t = 1 / max(obs_t, 1e-3 max(obs)).
std::vector<double> weights_from(const Tac& obs);
std::vector<double> weights_from(std::span<const double> obs);
double variance_floor(std::span<const double> obs);

struct BasisLibrary {
  std::vector<ResponseTiming> timings;
  Eigen::MatrixXd columns;  // frames x timings, -int C_obs h_i
  Eigen::MatrixXd fixed;    // frames x 3: C_R, int C_R, -int C_obs
  std::string reference_id;
  std::string grid_id;
};

BasisLibrary build_basis_library(const ReferenceColumns& ref, const Tac& obs,
                                 std::vector<ResponseTiming> timings);

// Minimum weighted RSS over the library; ties keep the earliest timing.
// With `nonneg`, negative components are clamped to zero and the rest
// re-solved until every component is non-negative (at most 20 passes).
// Throws NoValidFit when every timing is rank deficient.
WlsFit wls_fit_grid(const Tac& obs, const BasisLibrary& lib, bool nonneg);

// n independent timing draws from the (tD, tP, alpha) part of `priors`.
std::vector<ResponseTiming> sample_timing_library(std::size_t n,
                                                  const UniformBox& priors,
                                                  std::uint64_t seed);

}  // namespace abcpet
