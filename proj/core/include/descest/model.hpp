#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "descest/kcf.hpp"
#include "descest/numeric.hpp"
#include "descest/pencil.hpp"

namespace descest {

/// Linear stochastic discrete-time descriptor model
///   E x_{k+1} = A x_k + B u_k + F w_k,   w_k ~ N(0, I_p)
///   y_k       = H x_k + v_k,             v_k ~ N(0, R)
///   E x_0     ~ N(r0bar, P0)
/// E and A are n_eq x n and may be singular or non-square.
struct StochasticDescriptorModel {
  Eigen::MatrixXd E;      // n_eq x n
  Eigen::MatrixXd A;      // n_eq x n
  Eigen::MatrixXd B;      // n_eq x j
  Eigen::MatrixXd F;      // n_eq x p
  Eigen::MatrixXd H;      // m x n
  Eigen::MatrixXd R;      // m x m, symmetric positive definite
  Eigen::VectorXd r0bar;  // n_eq
  Eigen::MatrixXd P0;     // n_eq x n_eq, symmetric PSD

  Eigen::Index n_eq() const { return E.rows(); }
  Eigen::Index n() const { return E.cols(); }
  Eigen::Index n_inputs() const { return B.cols(); }
  Eigen::Index n_disturbances() const { return F.cols(); }
  Eigen::Index n_outputs() const { return H.rows(); }

  MatrixPencil pencil() const { return {E, A}; }

  /// Throws std::invalid_argument when any dimension is inconsistent.
  void check_dimensions() const;
};

struct CausalityWitness {
  int power = 0;       // i in E_N^i B_N / E_N^i F_N
  double norm_B = 0.0;
  double norm_F = 0.0;
};

struct ValidationReport {
  bool row_rank_ok = false;          // [E A] full row rank
  bool estimable_global = false;     // [E; H] full column rank
  bool estimable_u_blocks = false;   // [E_U; H_U] full column rank per block
  bool f_full_col_rank = false;
  int index = 0;                     // nu_d
  bool causal = false;
  bool overdetermined_blocks_present = false;
  bool r_positive_definite = false;
  bool p0_positive_definite = false;
  std::vector<CausalityWitness> causality_witnesses;
  std::vector<std::string> diagnostics;

  /// True when the model may be handed to the estimators: full row rank, no
  /// over-determined blocks, per-U-block estimableness, causal, R positive
  /// definite. Global estimableness is reported but not required.
  bool accepted_for_estimation() const {
    return row_rank_ok && !overdetermined_blocks_present &&
           estimable_u_blocks && causal && r_positive_definite;
  }
};

/// Well-posedness and causality analysis. Computes the KCF of (E, A) and
/// fills every report field; models containing over-determined blocks are
/// flagged because a zero row of the transformed pencil would constrain the
/// deterministic input. Propagates IllConditioned from compute_kcf.
ValidationReport validate(const StochasticDescriptorModel& model,
                          double tol = kDefaultRankTol);
ValidationReport validate(const StochasticDescriptorModel& model,
                          const KcfDecomposition& decomp,
                          double tol = kDefaultRankTol);

/// Causality check: the model is causal iff the index is <= 1 or every
/// product E_N^i B_N and E_N^i F_N for i = 1..index-1 vanishes. Returns the
/// verdict together with the per-power product norms.
std::pair<bool, std::vector<CausalityWitness>> check_causality(
    const StochasticDescriptorModel& model, const KcfDecomposition& decomp,
    double tol = kDefaultRankTol);

/// Column compression of F. When F lacks full column rank, returns a model
/// with F replaced by a full-column-rank factor F' satisfying F'F'^T = FF^T,
/// plus the orthonormal map carrying the original disturbance to the reduced
/// one (w' = map * w, still i.i.d. standard normal). A full-rank F is
/// returned unchanged with the identity map.
std::pair<StochasticDescriptorModel, Eigen::MatrixXd> reduce_f(
    const StochasticDescriptorModel& model, double tol = kDefaultRankTol);

}  // namespace descest
