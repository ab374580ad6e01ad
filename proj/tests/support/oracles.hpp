#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "descest/kcf.hpp"
#include "descest/model.hpp"
#include "descest/pencil.hpp"

// Independent reference implementations used only for verification. They are
// written from the textbook formulations and share no solver code with the
// library paths they check.
namespace oracles {

struct KalmanResult {
  Eigen::MatrixXd filtered;   // x_hat_{k|k}
  Eigen::MatrixXd predicted;  // x_hat_{k|k-1}
  std::vector<Eigen::MatrixXd> cov_filtered;
  std::vector<Eigen::MatrixXd> cov_predicted;
};

// Covariance-form Kalman filter for an ordinary state-space model
//   x_{k+1} = A x_k + B u_k + F w_k,  y_k = H x_k + v_k,  x_0 ~ N(x0, P0).
KalmanResult kalman_filter(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Eigen::MatrixXd& f, const Eigen::MatrixXd& h,
                           const Eigen::MatrixXd& r, const Eigen::VectorXd& x0,
                           const Eigen::MatrixXd& p0, const Eigen::MatrixXd& y,
                           const Eigen::MatrixXd& u);

// Rauch-Tung-Striebel fixed-interval smoother on top of the filter above.
Eigen::MatrixXd rts_smoother(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             const Eigen::MatrixXd& f, const Eigen::MatrixXd& h,
                             const Eigen::MatrixXd& r, const Eigen::VectorXd& x0,
                             const Eigen::MatrixXd& p0, const Eigen::MatrixXd& y,
                             const Eigen::MatrixXd& u);

// Coefficients of det(lambda*E - A) by Laplace expansion over polynomial
// entries (ascending powers). Only for square pencils with n <= 4.
std::vector<double> pencil_det_poly(const descest::MatrixPencil& pencil);

// Roots of a real polynomial via the companion matrix; near-zero leading
// coefficients are trimmed first.
std::vector<std::complex<double>> poly_roots(const std::vector<double>& coeffs,
                                             double tol = 1e-9);

// Deterministic mean propagation without measurements: the transformed prior
// mean drives the J-group, algebraic states follow -B_N u_k, free states sit
// at zero. This is the "prior-only" predictor the MAP estimate must beat.
Eigen::MatrixXd prior_only_predictor(const descest::StochasticDescriptorModel& model,
                                     const descest::KcfDecomposition& decomp,
                                     const Eigen::MatrixXd& u);

}  // namespace oracles
