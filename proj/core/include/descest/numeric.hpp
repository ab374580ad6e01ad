#pragma once

#include <Eigen/Dense>

namespace descest {

/// Singular values below tol * sigma_max * max(rows, cols) count as zero.
inline constexpr double kDefaultRankTol = 1e-10;

struct RankDecision {
  int rank = 0;
  double threshold = 0.0;
  /// True when some singular value lies within a factor 10 of the threshold,
  /// i.e. the cut between "zero" and "nonzero" is not clearly separated.
  bool ambiguous = false;
  Eigen::VectorXd singular_values;
};

RankDecision decide_rank(const Eigen::MatrixXd& m, double tol = kDefaultRankTol);

/// Rank against a fixed absolute threshold. Used where the noise floor is
/// set by an enclosing problem's scale rather than by the submatrix itself
/// (an all-noise subblock must come out as rank zero).
RankDecision decide_rank_abs(const Eigen::MatrixXd& m, double threshold);

int rank_of(const Eigen::MatrixXd& m, double tol = kDefaultRankTol);

bool is_nonsingular(const Eigen::MatrixXd& m, double tol = kDefaultRankTol);

/// sigma_max / sigma_min; +inf for numerically singular or empty input.
double condition_number(const Eigen::MatrixXd& m);

/// Orthonormal basis of the right null space, one column per direction.
Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& m,
                                 double tol = kDefaultRankTol);

/// Lower factor L with L * L^T = W for symmetric PSD W (tiny negative
/// eigenvalues are clamped to zero). Throws std::invalid_argument when W is
/// indefinite beyond tolerance.
Eigen::MatrixXd psd_sqrt_factor(const Eigen::MatrixXd& w,
                                double tol = kDefaultRankTol);

/// Inverse-covariance quadratic form ||z||^2_W = z^T W^+ z for a symmetric
/// PSD weight W. whitener() returns the r x n matrix L with L^T L = W^+, so
/// ||L z||^2 equals the quadratic form; directions in the null space of W
/// carry no weight.
class CovarianceWeight {
 public:
  explicit CovarianceWeight(const Eigen::MatrixXd& w,
                            double tol = kDefaultRankTol);

  bool positive_definite() const { return positive_definite_; }
  int rank() const { return rank_; }
  int dim() const { return dim_; }
  const Eigen::MatrixXd& whitener() const { return whitener_; }
  double quad(const Eigen::VectorXd& z) const;
  /// W^+ z.
  Eigen::VectorXd apply_pinv(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd apply_pinv(const Eigen::MatrixXd& z) const;

 private:
  Eigen::MatrixXd whitener_;  // rank x dim
  Eigen::MatrixXd pinv_;      // dim x dim
  int dim_ = 0;
  int rank_ = 0;
  bool positive_definite_ = false;
};

}  // namespace descest
