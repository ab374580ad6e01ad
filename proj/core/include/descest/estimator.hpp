#pragma once

#include <Eigen/Dense>

#include <vector>

#include "descest/kcf.hpp"
#include "descest/model.hpp"

namespace descest {

struct SolverDiagnostics {
  double condition_estimate = 0.0;
  /// Gradient norm of the objective the solver minimized, evaluated at the
  /// returned estimate, together with the reference norm at x = 0.
  double gradient_norm = 0.0;
  double gradient_reference = 0.0;
  int iterations = 0;
};

/// MAP state-sequence estimate. objective_value is the batch objective
///   1/2 ||E x_0 - r0bar||^2_{P0} + 1/2 sum ||y_k - H x_k||^2_R
///   + 1/2 sum ||E x_{k+1} - A x_k - B u_k||^2_{FF^T}
/// evaluated at the estimate, where ||z||^2_W = z^T W^+ z (inverse-covariance
/// weighting; pseudo-inverse for semidefinite weights).
struct MapEstimate {
  Eigen::MatrixXd states;                 // n x (T+1)
  double objective_value = 0.0;
  Eigen::VectorXd prior_residual;         // E x_0 - r0bar
  Eigen::MatrixXd measurement_residuals;  // m x (T+1): y_k - H x_k
  Eigen::MatrixXd dynamics_residuals;     // n_eq x T
  SolverDiagnostics diagnostics;
};

struct RecursiveEstimate {
  Eigen::MatrixXd filtered;    // n x (T+1); column k is x_hat_{k|k}
  Eigen::VectorXd final_state; // x_hat_{T|T}, equals the batch x_hat_T
  std::vector<double> information_condition;  // per step, after fusing y_k
};

/// Batch MAP estimate: minimizes the objective above over the stacked state
/// sequence, solved as one block-bidiagonal least-squares problem by a
/// forward orthogonal-elimination sweep (square-root information form; no
/// normal equations). y is m x (T+1), u is j x (T+1), T >= 0.
///
/// Requires a model that passes validation; pass a precomputed report to
/// skip the internal KCF run. Throws ModelRejected, SingularWeight when
/// FF^T is singular (use the constrained path), Unestimable when the stacked
/// system is column-rank deficient.
MapEstimate solve_map_batch(const StochasticDescriptorModel& model,
                            const Eigen::MatrixXd& y, const Eigen::MatrixXd& u,
                            const ValidationReport* report = nullptr,
                            double tol = kDefaultRankTol);

/// Equality-constrained formulation covering singular FF^T: minimizes
///   1/2 ||E x_0 - r0bar||^2_{P0} + 1/2 sum ||y_k - H x_k||^2_R
///   + 1/2 sum ||w_k||^2
/// over (x, w) subject to E x_{k+1} = A x_k + B u_k + F w_k, via a dense KKT
/// solve. Requires F of full column rank (apply reduce_f first). Equals
/// solve_map_batch whenever FF^T is positive definite.
MapEstimate solve_map_constrained(const StochasticDescriptorModel& model,
                                  const Eigen::MatrixXd& y,
                                  const Eigen::MatrixXd& u,
                                  const ValidationReport* report = nullptr,
                                  double tol = kDefaultRankTol);

/// MAP estimate built in transformed (canonical) coordinates: prior weighted
/// by P P0 P^T, dynamics by (PF)(PF)^T, plus the uninformative free-state
/// penalty 1/(2 q^2) sum ||x~^1_{U,k} - mu||^2. Mapped back through Q.
/// Without U-blocks the result is independent of q and equals the batch
/// estimate; with U-blocks it converges to it as q grows.
MapEstimate solve_map_transformed(const StochasticDescriptorModel& model,
                                  const KcfDecomposition& decomp,
                                  const Eigen::MatrixXd& y,
                                  const Eigen::MatrixXd& u, double q = 1e8,
                                  const Eigen::VectorXd& mu_u = {},
                                  double tol = kDefaultRankTol);

/// Constrained maximum-likelihood estimate: the prior and the deterministic
/// input sequence are treated as noisy observations of the state sequence
/// (r0bar = E x_0 + e with covariance P0; B u_k = E x_{k+1} - A x_k - F w_k
/// with covariance FF^T) and the likelihood is maximized over the states.
/// The resulting least-squares system coincides with the batch MAP system,
/// so the two estimates agree.
MapEstimate solve_ml(const StochasticDescriptorModel& model,
                     const Eigen::MatrixXd& y, const Eigen::MatrixXd& u,
                     const ValidationReport* report = nullptr,
                     double tol = kDefaultRankTol);

/// Recursive (information-filter) solution by forward block elimination of
/// the batch normal equations: propagate the information pair (Omega_k,
/// eta_k) of x_k, fuse each measurement, and marginalize against the
/// dynamics block. The final filtered state equals the batch estimate's last
/// state. Requires index <= 1, FF^T and R positive definite, and [E; H] of
/// full column rank; throws LossOfInformation when the fused information
/// matrix goes singular at some step.
RecursiveEstimate solve_recursive(const StochasticDescriptorModel& model,
                                  const Eigen::MatrixXd& y,
                                  const Eigen::MatrixXd& u,
                                  const ValidationReport* report = nullptr,
                                  double tol = kDefaultRankTol);

/// Dense verification oracle: forms the whole stacked residual system
/// explicitly and solves it by pivoted orthogonal factorization. Limited to
/// (T+1)*n <= 200; intended for tests.
MapEstimate solve_dense_oracle(const StochasticDescriptorModel& model,
                               const Eigen::MatrixXd& y,
                               const Eigen::MatrixXd& u,
                               const ValidationReport* report = nullptr,
                               double tol = kDefaultRankTol);

/// Batch objective evaluated at an arbitrary state sequence (pseudo-inverse
/// quadratic forms for semidefinite weights).
double evaluate_objective(const StochasticDescriptorModel& model,
                          const Eigen::MatrixXd& y, const Eigen::MatrixXd& u,
                          const Eigen::MatrixXd& states,
                          double tol = kDefaultRankTol);

}  // namespace descest
