#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "descest/numeric.hpp"

namespace descest {

/// The one-parameter matrix family lambda*E - A with E, A real and of equal
/// shape. Non-square pencils are allowed; n_eq() counts equations (rows) and
/// n() counts states (columns).
struct MatrixPencil {
  Eigen::MatrixXd E;
  Eigen::MatrixXd A;

  MatrixPencil() = default;
  MatrixPencil(Eigen::MatrixXd e, Eigen::MatrixXd a);

  Eigen::Index n_eq() const { return E.rows(); }
  Eigen::Index n() const { return E.cols(); }

  /// lambda*E - A evaluated at a point.
  Eigen::MatrixXd eval(double lambda) const { return lambda * E - A; }
};

/// Finite generalized eigenvalue. im == 0 denotes a real eigenvalue; im > 0
/// denotes the conjugate pair re +/- i*im stored once (never im < 0).
struct Eigenvalue {
  double re = 0.0;
  double im = 0.0;

  bool is_complex_pair() const { return im > 0.0; }

  static Eigenvalue real(double alpha) { return {alpha, 0.0}; }
  static Eigenvalue complex_pair(double mu, double omega);
};

struct JordanBlockSpec {
  int size = 1;        // rho; the realized block is 2*rho x 2*rho for pairs
  Eigenvalue eig;

  int rows() const { return eig.is_complex_pair() ? 2 * size : size; }
};

/// Kronecker invariants of a pencil: counts of zero columns/rows plus the
/// index lists for the four block families. Fully characterizes the pencil
/// up to strict equivalence.
struct KroneckerStructure {
  int eps0 = 0;                          // zero columns
  std::vector<int> eps;                  // under-determined block sizes
  std::vector<JordanBlockSpec> jordan;   // finite eigenvalue blocks
  std::vector<int> nilpotent;            // infinite eigenvalue block sizes
  std::vector<int> eta;                  // over-determined block sizes
  int eta0 = 0;                          // zero rows

  /// Throws std::invalid_argument when a size is < 1, a count < 0, or a
  /// complex pair has omega <= 0.
  void check() const;

  Eigen::Index rows() const;  // n_eq of the canonical pencil
  Eigen::Index cols() const;  // n of the canonical pencil

  /// Within each family, blocks sorted by decreasing size; Jordan ties by
  /// eigenvalue real part, then imaginary part.
  KroneckerStructure canonical_sorted() const;

  /// Structural equality: identical index lists, eigenvalues within
  /// eig_tol * (1 + |lambda|). Both sides are compared in canonical order.
  bool approx_equal(const KroneckerStructure& other,
                    double eig_tol = 1e-6) const;

  bool has_u_part() const { return eps0 > 0 || !eps.empty(); }
  bool has_o_part() const { return eta0 > 0 || !eta.empty(); }

  /// Column index of the free (first) state of each under-determined block,
  /// in canonical column order: one per zero column, then one per eps block.
  std::vector<int> free_state_columns() const;

  std::string to_string() const;
};

/// Under-determined bidiagonal block of size eps x (eps+1): E carries ones on
/// the superdiagonal, A on the diagonal. [lambda^eps, ..., lambda, 1]^T is a
/// right null vector of lambda*E - A for every lambda.
MatrixPencil make_u_block(int eps);

/// Real Jordan block: for a real eigenvalue, E = I and A has alpha on the
/// diagonal and ones on the superdiagonal (size x size). For a complex pair,
/// the 2*size x 2*size real form with Delta = [[mu, omega], [-omega, mu]]
/// diagonal blocks and I_2 superdiagonal blocks.
MatrixPencil make_j_block(int size, const Eigenvalue& eig);

/// Nilpotent block of size sigma x sigma: E is the nilpotent shift (ones on
/// the superdiagonal), A = I. E^k = 0 exactly for k >= sigma.
MatrixPencil make_n_block(int size);

/// Over-determined bidiagonal block of size (eta+1) x eta; [1, lambda, ...,
/// lambda^eta] is a left null vector of lambda*E - A for every lambda.
MatrixPencil make_o_block(int eta);

/// Block-diagonal concatenation in canonical order: zero columns, U-blocks,
/// J-blocks, N-blocks, O-blocks, zero rows.
MatrixPencil assemble_canonical(const KroneckerStructure& structure);

/// (P*E*Q, P*A*Q) for nonsingular square P, Q. Throws on dimension mismatch
/// or when P or Q fails the rank check.
MatrixPencil apply_equivalence(const Eigen::MatrixXd& p,
                               const Eigen::MatrixXd& q,
                               const MatrixPencil& pencil,
                               double tol = kDefaultRankTol);

/// True iff the pencil is square and det(lambda*E - A) does not vanish
/// identically. Tested at the fixed probes {0, 1, -1, 2, pi} plus three
/// seeded pseudo-random values; singular only if every probe is
/// rank-deficient.
bool is_regular(const MatrixPencil& pencil, double tol = kDefaultRankTol);

}  // namespace descest
