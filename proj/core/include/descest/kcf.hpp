#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

#include "descest/numeric.hpp"
#include "descest/pencil.hpp"

namespace descest {

struct KcfOptions {
  /// Relative tolerance for every rank decision of the reduction.
  double rank_tol = kDefaultRankTol;
  /// Two finite eigenvalues within cluster_tol * (1 + |lambda|) are merged
  /// into one Jordan cluster. When the decomposition fails to reconstruct at
  /// this tolerance the analysis retries with a coarser value (x10, at most
  /// three times) before giving up; Jordan eigenvalues of defective blocks
  /// scatter like eps^(1/k) and routinely need the coarser rungs.
  double cluster_tol = 1e-6;
  /// Jordan chain extraction is supported at desk scale only.
  int max_dim = 32;
  /// Required relative reconstruction accuracy of P*E*Q vs the canonical form.
  double residual_tol = 1e-8;
  /// Seed for the transformation-selection draws (deterministic).
  std::uint64_t seed = 0x6b6366ULL;
};

/// Real strict-equivalence transformation to Kronecker canonical form:
/// P*E*Q and P*A*Q equal assemble_canonical(structure) up to
/// reconstruction_residual. Column/row offsets split the transformed state
/// and equations into the U | J | N | O groups.
struct KcfDecomposition {
  Eigen::MatrixXd P;
  Eigen::MatrixXd Q;
  KroneckerStructure structure;
  /// offsets[0..4] = {0, end of U, end of J, end of N, total}.
  std::array<Eigen::Index, 5> col_offsets{};
  std::array<Eigen::Index, 5> row_offsets{};
  double reconstruction_residual = 0.0;  // relative
  double cond_P = 0.0;
  double cond_Q = 0.0;

  Eigen::Index col_group_size(int g) const {
    return col_offsets[g + 1] - col_offsets[g];
  }
  Eigen::Index row_group_size(int g) const {
    return row_offsets[g + 1] - row_offsets[g];
  }
};

/// Per-group slices of the transformed system matrices: row groups of P*B and
/// P*F, column groups of H*Q, and the canonical diagonal blocks of the pencil
/// (E_J and A_N are identities, E_N is nilpotent). The O-group rows are kept
/// for diagnostics only.
struct TransformedSystem {
  Eigen::MatrixXd E_U, A_U, B_U, F_U, H_U;
  Eigen::MatrixXd E_J, A_J, B_J, F_J, H_J;
  Eigen::MatrixXd E_N, A_N, B_N, F_N, H_N;
  Eigen::MatrixXd B_O, F_O, H_O;
  Eigen::MatrixXd B_tilde, F_tilde, H_tilde;  // P*B, P*F, H*Q unsliced
};

struct KcfVerification {
  double residual_E = 0.0;      // ||P*E*Q - E_canonical||
  double residual_A = 0.0;
  double relative_residual = 0.0;
  bool dims_consistent = false;
  double cond_P = 0.0;
  double cond_Q = 0.0;
};

/// Kronecker canonical decomposition of an arbitrary real pencil.
///
/// Staircase reduction with SVD rank decisions deflates the singular part
/// (minimal indices) and the infinite part; the remaining regular pencil is
/// analyzed through its real Schur form with eigenvalue clustering. The
/// transformations are recovered by solving the strict-equivalence system
/// E*Q = X*E_can, A*Q = X*A_can for a well-conditioned nonsingular pair
/// (X = P^-1, Q) and are validated against residual_tol.
///
/// Throws IllConditioned when a rank decision is ambiguous at the given
/// tolerance, when the input exceeds max_dim, or when no acceptable
/// transformation is found.
KcfDecomposition compute_kcf(const MatrixPencil& pencil,
                             const KcfOptions& options = {});
KcfDecomposition compute_kcf(const MatrixPencil& pencil, double rank_tol);

/// Index nu_d of the descriptor model: size of the largest nilpotent block,
/// or 0 when the pencil has no infinite part.
int nilpotency_index(const KcfDecomposition& decomp);

/// Slices P*B, P*F and H*Q conformally with the decomposition's groups.
TransformedSystem partition_transformed(const KcfDecomposition& decomp,
                                        const Eigen::MatrixXd& B,
                                        const Eigen::MatrixXd& F,
                                        const Eigen::MatrixXd& H);

/// Pure diagnostic: reconstruction residuals, dimension consistency and
/// condition estimates of a decomposition against a pencil.
KcfVerification verify_kcf(const MatrixPencil& pencil,
                           const KcfDecomposition& decomp);

}  // namespace descest
