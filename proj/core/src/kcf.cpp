#include "descest/kcf.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "descest/errors.hpp"
#include "descest/rng.hpp"

namespace descest {

namespace {

// Threshold for the Weyr (nullity-of-powers) rank decisions inside a Jordan
// cluster. The noise floor there is linear in the backward error while the
// structural singular values scale with the eigenvalue separation, so a
// fixed mid-band constant is reliable at desk scale.
constexpr double kWeyrTol = 1e-7;

struct StaircaseResult {
  std::vector<int> s;  // right nullity of E at each step
  std::vector<int> r;  // row rank of A restricted to the nullity columns
  Eigen::MatrixXd E_rem, A_rem;
  bool ambiguous = false;
};

// One combined staircase pass: deflates right minimal indices together with
// infinite elementary divisors. Terminates when E has full column rank.
// Rank decisions use the absolute threshold of the enclosing pencil: an
// all-noise subblock must count as zero, not as full rank of itself.
StaircaseResult staircase(Eigen::MatrixXd E, Eigen::MatrixXd A,
                          double threshold) {
  StaircaseResult out;
  for (;;) {
    const Eigen::Index m = E.rows();
    const Eigen::Index n = E.cols();
    if (n == 0) break;

    int rank_e = 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> esvd;
    if (m > 0) {
      esvd.compute(E, Eigen::ComputeFullV);
      const RankDecision d = decide_rank_abs(E, threshold);
      out.ambiguous |= d.ambiguous;
      rank_e = d.rank;
    }
    const int s = static_cast<int>(n) - rank_e;
    if (s == 0) break;

    if (m > 0) {
      // Column compression: null columns of E first.
      Eigen::MatrixXd v(n, n);
      v.leftCols(s) = esvd.matrixV().rightCols(s);
      v.rightCols(rank_e) = esvd.matrixV().leftCols(rank_e);
      E = E * v;
      A = A * v;
    }

    int r = 0;
    if (m > 0) {
      // Row compression of the A part over the nullity columns.
      const Eigen::MatrixXd a1 = A.leftCols(s);
      const RankDecision d = decide_rank_abs(a1, threshold);
      out.ambiguous |= d.ambiguous;
      r = d.rank;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(a1, Eigen::ComputeFullU);
      const Eigen::MatrixXd ut = svd.matrixU().transpose();
      A = ut * A;
      E = ut * E;
    }

    out.s.push_back(s);
    out.r.push_back(r);
    E = E.bottomRightCorner(m - r, n - s).eval();
    A = A.bottomRightCorner(m - r, n - s).eval();
  }
  out.E_rem = std::move(E);
  out.A_rem = std::move(A);
  return out;
}

struct EigCluster {
  bool complex_pair = false;
  double re = 0.0;
  double im = 0.0;            // > 0 for complex pairs
  int multiplicity = 0;       // eigenvalue count (pairs counted once)
  std::vector<int> sizes;     // Jordan block sizes, descending
};

int nullity_of(const Eigen::MatrixXd& k) {
  if (k.rows() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(k);
  const auto& sv = svd.singularValues();
  const double thresh = kWeyrTol * (1.0 + sv(0));
  int null = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) <= thresh) ++null;
  }
  return null;
}

// Jordan block sizes from the nullity sequence of K, K^2, ... where the
// per-power nullity growth counts chains of that length or longer.
bool weyr_sizes(const Eigen::MatrixXd& k, int multiplicity, int step,
                std::vector<int>* sizes) {
  const int n = static_cast<int>(k.rows());
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  std::vector<int> chains_ge;  // chains_ge[j] = #chains of length >= j+1
  int nu_prev = 0;
  for (int j = 1; j <= multiplicity; ++j) {
    power = (power * k).eval();
    const int nu = nullity_of(power);
    const int d = (nu - nu_prev) / step;
    if ((nu - nu_prev) % step != 0) return false;
    if (d <= 0) return false;
    if (!chains_ge.empty() && d > chains_ge.back()) return false;
    chains_ge.push_back(d);
    nu_prev = nu;
    const int total =
        std::accumulate(chains_ge.begin(), chains_ge.end(), 0);
    if (total == multiplicity) break;
    if (total > multiplicity) return false;
  }
  if (std::accumulate(chains_ge.begin(), chains_ge.end(), 0) != multiplicity) {
    return false;
  }
  sizes->clear();
  for (int j = static_cast<int>(chains_ge.size()); j >= 1; --j) {
    const int exact =
        chains_ge[j - 1] - (j < static_cast<int>(chains_ge.size())
                                ? chains_ge[j]
                                : 0);
    for (int c = 0; c < exact; ++c) sizes->push_back(j);
  }
  std::sort(sizes->begin(), sizes->end(), std::greater<int>());
  return true;
}

// Eigenvalue clustering plus per-cluster Jordan analysis of the regular
// finite part M = E_f^-1 * A_f.
bool analyze_finite(const Eigen::MatrixXd& m, double ctol,
                    std::vector<EigCluster>* clusters) {
  clusters->clear();
  const int n = static_cast<int>(m.rows());
  if (n == 0) return true;

  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) return false;

  struct Point {
    double re;
    double im;  // >= 0, conjugates folded
    bool complex;
  };
  std::vector<Point> pts(n);
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::complex<double> lam = es.eigenvalues()(i);
    scale = std::max(scale, std::abs(lam));
    Point p{lam.real(), std::abs(lam.imag()), false};
    // A conjugate pair closer to the real axis than the clustering radius is
    // treated as a perturbed real eigenvalue.
    p.complex = p.im > ctol * (1.0 + std::abs(lam));
    if (!p.complex) p.im = 0.0;
    pts[i] = p;
  }

  // Union-find clustering at radius ctol * (1 + |lambda|).
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dist =
          std::hypot(pts[i].re - pts[j].re, pts[i].im - pts[j].im);
      const double radius =
          ctol * (1.0 + std::max(std::hypot(pts[i].re, pts[i].im),
                                 std::hypot(pts[j].re, pts[j].im)));
      if (dist <= radius) parent[find(i)] = find(j);
    }
  }

  std::vector<std::vector<int>> groups(n);
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);

  for (const auto& g : groups) {
    if (g.empty()) continue;
    EigCluster c;
    int n_complex = 0;
    double sum_re = 0.0, sum_im = 0.0;
    for (int idx : g) {
      sum_re += pts[idx].re;
      if (pts[idx].complex) {
        ++n_complex;
        sum_im += pts[idx].im;
      }
    }
    const int count = static_cast<int>(g.size());
    const bool any_real = n_complex < count;
    c.re = sum_re / count;
    if (any_real) {
      // Mixed clusters are perturbed defective real eigenvalues.
      c.complex_pair = false;
      c.multiplicity = count;
      const Eigen::MatrixXd k =
          m - c.re * Eigen::MatrixXd::Identity(n, n);
      if (!weyr_sizes(k, c.multiplicity, /*step=*/1, &c.sizes)) return false;
    } else {
      if (n_complex % 2 != 0) return false;
      c.complex_pair = true;
      c.im = sum_im / count;
      c.multiplicity = n_complex / 2;  // conjugate pairs
      const Eigen::MatrixXd shifted =
          m - c.re * Eigen::MatrixXd::Identity(n, n);
      const Eigen::MatrixXd k =
          shifted * shifted +
          (c.im * c.im) * Eigen::MatrixXd::Identity(n, n);
      if (!weyr_sizes(k, c.multiplicity, /*step=*/2, &c.sizes)) return false;
    }
    clusters->push_back(std::move(c));
  }
  return true;
}

struct EquivalenceSolution {
  Eigen::MatrixXd P, Q;
  double residual_rel = std::numeric_limits<double>::infinity();
  double cond_P = std::numeric_limits<double>::infinity();
  double cond_Q = std::numeric_limits<double>::infinity();
  bool ok = false;
};

// Solves E*Q = X*Et, A*Q = X*At for a nonsingular, well-conditioned pair
// (X = P^-1, Q). The solution space is the null space of a 2mn x (m^2+n^2)
// linear system; a nonsingular element exists iff the pencils are strictly
// equivalent, and a generic element of the space is nonsingular. Trial 0
// projects the identity pair onto the space (exact for inputs already in
// canonical form); further trials draw seeded random coefficients, and the
// best-conditioned candidate wins.
EquivalenceSolution solve_equivalence(const Eigen::MatrixXd& e,
                                      const Eigen::MatrixXd& a,
                                      const Eigen::MatrixXd& et,
                                      const Eigen::MatrixXd& at,
                                      std::uint64_t seed) {
  const Eigen::Index m = e.rows();
  const Eigen::Index n = e.cols();
  EquivalenceSolution best;

  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2 * m * n, n * n + m * m);
  auto fill = [&](const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs,
                  Eigen::Index row0) {
    // vec(lhs*Q) = (I kron lhs) vec(Q); vec(X*rhs) = (rhs^T kron I) vec(X).
    for (Eigen::Index j = 0; j < n; ++j) {
      t.block(row0 + j * m, j * n, m, n) = lhs;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < m; ++k) {
        // column block k of X, scaled by rhs(k, j)
        for (Eigen::Index i = 0; i < m; ++i) {
          t(row0 + j * m + i, n * n + k * m + i) -= rhs(k, j);
        }
      }
    }
  };
  fill(e, et, 0);
  fill(a, at, m * n);

  Eigen::MatrixXd null_basis;
  const double tmax = t.cwiseAbs().maxCoeff();
  const Eigen::Index ncols = n * n + m * m;
  const double rel_thresh =
      std::max(1e-11, 1e3 * std::numeric_limits<double>::epsilon() *
                          static_cast<double>(std::max(m, n)));
  if (tmax == 0.0) {
    null_basis = Eigen::MatrixXd::Identity(ncols, ncols);
  } else if (ncols <= 400) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(t, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double thresh = sv(0) * rel_thresh;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
      if (sv(i) > thresh) ++rank;
    }
    const Eigen::Index dim = ncols - rank;
    if (dim == 0) return best;
    null_basis = svd.matrixV().rightCols(dim);
  } else {
    // Rank-revealing QR null space; cheaper than a full SVD at this size and
    // accurate enough given the clean spectral gap of the system.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(t);
    qr.setThreshold(rel_thresh);
    const Eigen::Index r = qr.rank();
    if (r == ncols) return best;
    const Eigen::MatrixXd rmat = qr.matrixR()
                                     .topLeftCorner(r, ncols)
                                     .triangularView<Eigen::Upper>();
    Eigen::MatrixXd basis(ncols, ncols - r);
    basis.topRows(r) =
        -rmat.leftCols(r).triangularView<Eigen::Upper>().solve(
            rmat.rightCols(ncols - r));
    basis.bottomRows(ncols - r) =
        Eigen::MatrixXd::Identity(ncols - r, ncols - r);
    basis = qr.colsPermutation() * basis;
    Eigen::HouseholderQR<Eigen::MatrixXd> onb(basis);
    null_basis =
        onb.householderQ() * Eigen::MatrixXd::Identity(ncols, ncols - r);
  }

  const Eigen::Index dim = null_basis.cols();
  Eigen::VectorXd identity_pair(n * n + m * m);
  Eigen::Map<Eigen::MatrixXd>(identity_pair.data(), n, n) =
      Eigen::MatrixXd::Identity(n, n);
  Eigen::Map<Eigen::MatrixXd>(identity_pair.data() + n * n, m, m) =
      Eigen::MatrixXd::Identity(m, m);

  const int kTrials = 12;
  for (int trial = 0; trial < kTrials; ++trial) {
    Eigen::VectorXd z;
    if (trial == 0) {
      z = null_basis * (null_basis.transpose() * identity_pair);
    } else {
      CounterRng rng(seed, static_cast<std::uint64_t>(trial));
      z = null_basis * rng.normal_vector(static_cast<int>(dim));
    }
    const double zn = z.norm();
    if (zn < 1e-12) continue;
    z /= zn;
    const Eigen::MatrixXd q = Eigen::Map<Eigen::MatrixXd>(z.data(), n, n);
    const Eigen::MatrixXd x =
        Eigen::Map<Eigen::MatrixXd>(z.data() + n * n, m, m);
    const double cond_q = condition_number(q);
    const double cond_x = condition_number(x);
    if (!std::isfinite(cond_q) || !std::isfinite(cond_x)) continue;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(x);
    if (!lu.isInvertible()) continue;
    const Eigen::MatrixXd p = lu.inverse();
    const double scale = std::max({e.norm(), a.norm(), 1.0});
    const double res =
        std::max((p * e * q - et).norm(), (p * a * q - at).norm()) / scale;
    const double cand_cond = std::max(cond_q, cond_x);
    const double best_cond = std::max(best.cond_P, best.cond_Q);
    const bool better =
        !best.ok || res < 0.25 * best.residual_rel ||
        (res <= 4.0 * best.residual_rel && cand_cond < best_cond);
    if (better) {
      best.P = p;
      best.Q = q;
      best.residual_rel = res;
      best.cond_P = cond_x;
      best.cond_Q = cond_q;
      best.ok = true;
    }
  }
  return best;
}

std::array<Eigen::Index, 5> column_offsets(const KroneckerStructure& s) {
  Eigen::Index u = s.eps0;
  for (int e : s.eps) u += e + 1;
  Eigen::Index j = 0;
  for (const auto& b : s.jordan) j += b.rows();
  Eigen::Index nn = 0;
  for (int sig : s.nilpotent) nn += sig;
  Eigen::Index o = 0;
  for (int h : s.eta) o += h;
  return {0, u, u + j, u + j + nn, u + j + nn + o};
}

std::array<Eigen::Index, 5> row_offsets_of(const KroneckerStructure& s) {
  Eigen::Index u = 0;
  for (int e : s.eps) u += e;
  Eigen::Index j = 0;
  for (const auto& b : s.jordan) j += b.rows();
  Eigen::Index nn = 0;
  for (int sig : s.nilpotent) nn += sig;
  Eigen::Index o = s.eta0;
  for (int h : s.eta) o += h + 1;
  return {0, u, u + j, u + j + nn, u + j + nn + o};
}

}  // namespace

KcfDecomposition compute_kcf(const MatrixPencil& pencil,
                             const KcfOptions& options) {
  const Eigen::Index m = pencil.n_eq();
  const Eigen::Index n = pencil.n();
  if (std::max(m, n) > options.max_dim) {
    throw IllConditioned(
        "compute_kcf: input exceeds the supported desk-scale dimension (" +
        std::to_string(options.max_dim) + ")");
  }

  // Shared noise floor: tol times the pencil's scale times its size.
  const double pencil_scale =
      std::max(pencil.E.operatorNorm(), pencil.A.operatorNorm());
  const double rank_threshold = options.rank_tol * pencil_scale *
                                static_cast<double>(std::max(m, n));

  // Stage 1: right minimal indices and infinite elementary divisors.
  const StaircaseResult st1 = staircase(pencil.E, pencil.A, rank_threshold);
  if (st1.ambiguous) {
    throw IllConditioned(
        "compute_kcf: ambiguous rank decision in the staircase reduction; "
        "retry with a different tolerance");
  }
  KroneckerStructure base;
  const auto steps1 = static_cast<int>(st1.s.size());
  for (int j = 1; j <= steps1; ++j) {
    const int n_eps = st1.s[j - 1] - st1.r[j - 1];
    const int s_next = j < steps1 ? st1.s[j] : 0;
    const int n_nilp = st1.r[j - 1] - s_next;
    if (n_eps < 0 || n_nilp < 0) {
      throw IllConditioned("compute_kcf: inconsistent staircase counts");
    }
    if (j == 1) {
      base.eps0 = n_eps;
    } else {
      for (int c = 0; c < n_eps; ++c) base.eps.push_back(j - 1);
    }
    for (int c = 0; c < n_nilp; ++c) base.nilpotent.push_back(j);
  }

  // Stage 2 on the transposed remainder: left minimal indices. The remainder
  // has no infinite part left, so the dual pass must not report any.
  const StaircaseResult st2 = staircase(st1.E_rem.transpose(),
                                        st1.A_rem.transpose(),
                                        rank_threshold);
  if (st2.ambiguous) {
    throw IllConditioned(
        "compute_kcf: ambiguous rank decision in the dual staircase; "
        "retry with a different tolerance");
  }
  const auto steps2 = static_cast<int>(st2.s.size());
  for (int j = 1; j <= steps2; ++j) {
    const int n_eta = st2.s[j - 1] - st2.r[j - 1];
    const int s_next = j < steps2 ? st2.s[j] : 0;
    const int spurious = st2.r[j - 1] - s_next;
    if (n_eta < 0 || spurious != 0) {
      throw IllConditioned(
          "compute_kcf: dual staircase detected structure that stage one "
          "should have removed; rank decisions are unreliable");
    }
    if (j == 1) {
      base.eta0 = n_eta;
    } else {
      for (int c = 0; c < n_eta; ++c) base.eta.push_back(j - 1);
    }
  }

  const Eigen::MatrixXd& e_f = st2.E_rem;
  const Eigen::MatrixXd& a_f = st2.A_rem;
  if (e_f.rows() != e_f.cols()) {
    throw IllConditioned("compute_kcf: regular part is not square");
  }
  Eigen::MatrixXd m_reg;
  if (e_f.rows() > 0) {
    if (decide_rank_abs(e_f, rank_threshold).rank < e_f.rows()) {
      throw IllConditioned(
          "compute_kcf: E part of the regular pencil is singular after "
          "deflation");
    }
    m_reg = e_f.partialPivLu().solve(a_f);
  }

  // Eigenvalue clustering is retried at coarser tolerances when the
  // resulting structure fails to reconstruct the pencil: eigenvalues of a
  // defective block of size k scatter like eps^(1/k), which can exceed the
  // default radius.
  std::string failure = "no candidate structure reconstructed the pencil";
  for (int rung = 0; rung < 4; ++rung) {
    const double ctol = options.cluster_tol * std::pow(10.0, rung);
    std::vector<EigCluster> clusters;
    if (!analyze_finite(m_reg, ctol, &clusters)) continue;

    KroneckerStructure structure = base;
    for (const auto& c : clusters) {
      for (int size : c.sizes) {
        JordanBlockSpec spec;
        spec.size = size;
        spec.eig = c.complex_pair ? Eigenvalue::complex_pair(c.re, c.im)
                                  : Eigenvalue::real(c.re);
        structure.jordan.push_back(spec);
      }
    }
    structure = structure.canonical_sorted();
    if (structure.rows() != m || structure.cols() != n) {
      failure = "candidate structure dimensions do not match the pencil";
      continue;
    }

    const MatrixPencil target = assemble_canonical(structure);
    const EquivalenceSolution sol = solve_equivalence(
        pencil.E, pencil.A, target.E, target.A, options.seed + rung);
    if (!sol.ok) {
      failure = "no nonsingular strict-equivalence transformation found";
      continue;
    }
    if (sol.residual_rel > options.residual_tol) {
      std::ostringstream os;
      os << "reconstruction residual " << sol.residual_rel
         << " exceeds tolerance " << options.residual_tol;
      failure = os.str();
      continue;
    }

    KcfDecomposition out;
    out.P = sol.P;
    out.Q = sol.Q;
    out.structure = std::move(structure);
    out.col_offsets = column_offsets(out.structure);
    out.row_offsets = row_offsets_of(out.structure);
    out.reconstruction_residual = sol.residual_rel;
    out.cond_P = sol.cond_P;
    out.cond_Q = sol.cond_Q;
    return out;
  }
  throw IllConditioned("compute_kcf: " + failure);
}

KcfDecomposition compute_kcf(const MatrixPencil& pencil, double rank_tol) {
  KcfOptions options;
  options.rank_tol = rank_tol;
  return compute_kcf(pencil, options);
}

int nilpotency_index(const KcfDecomposition& decomp) {
  const auto& nil = decomp.structure.nilpotent;
  if (nil.empty()) return 0;
  return *std::max_element(nil.begin(), nil.end());
}

TransformedSystem partition_transformed(const KcfDecomposition& decomp,
                                        const Eigen::MatrixXd& B,
                                        const Eigen::MatrixXd& F,
                                        const Eigen::MatrixXd& H) {
  const Eigen::Index m = decomp.P.rows();
  const Eigen::Index n = decomp.Q.rows();
  if (B.rows() != m || F.rows() != m) {
    throw std::invalid_argument(
        "partition_transformed: B and F must have n_eq rows");
  }
  if (H.cols() != n) {
    throw std::invalid_argument("partition_transformed: H must have n cols");
  }

  TransformedSystem t;
  t.B_tilde = decomp.P * B;
  t.F_tilde = decomp.P * F;
  t.H_tilde = H * decomp.Q;

  const MatrixPencil canon = assemble_canonical(decomp.structure);
  const auto& ro = decomp.row_offsets;
  const auto& co = decomp.col_offsets;
  auto rows = [&](int g) { return ro[g + 1] - ro[g]; };
  auto cols = [&](int g) { return co[g + 1] - co[g]; };

  t.E_U = canon.E.block(ro[0], co[0], rows(0), cols(0));
  t.A_U = canon.A.block(ro[0], co[0], rows(0), cols(0));
  t.E_J = canon.E.block(ro[1], co[1], rows(1), cols(1));
  t.A_J = canon.A.block(ro[1], co[1], rows(1), cols(1));
  t.E_N = canon.E.block(ro[2], co[2], rows(2), cols(2));
  t.A_N = canon.A.block(ro[2], co[2], rows(2), cols(2));

  t.B_U = t.B_tilde.middleRows(ro[0], rows(0));
  t.B_J = t.B_tilde.middleRows(ro[1], rows(1));
  t.B_N = t.B_tilde.middleRows(ro[2], rows(2));
  t.B_O = t.B_tilde.middleRows(ro[3], rows(3));

  t.F_U = t.F_tilde.middleRows(ro[0], rows(0));
  t.F_J = t.F_tilde.middleRows(ro[1], rows(1));
  t.F_N = t.F_tilde.middleRows(ro[2], rows(2));
  t.F_O = t.F_tilde.middleRows(ro[3], rows(3));

  t.H_U = t.H_tilde.middleCols(co[0], cols(0));
  t.H_J = t.H_tilde.middleCols(co[1], cols(1));
  t.H_N = t.H_tilde.middleCols(co[2], cols(2));
  t.H_O = t.H_tilde.middleCols(co[3], cols(3));
  return t;
}

KcfVerification verify_kcf(const MatrixPencil& pencil,
                           const KcfDecomposition& decomp) {
  KcfVerification v;
  v.dims_consistent = decomp.structure.rows() == pencil.n_eq() &&
                      decomp.structure.cols() == pencil.n() &&
                      decomp.P.rows() == pencil.n_eq() &&
                      decomp.Q.rows() == pencil.n() &&
                      decomp.row_offsets[4] == pencil.n_eq() &&
                      decomp.col_offsets[4] == pencil.n();
  if (!v.dims_consistent) return v;
  const MatrixPencil canon = assemble_canonical(decomp.structure);
  v.residual_E = (decomp.P * pencil.E * decomp.Q - canon.E).norm();
  v.residual_A = (decomp.P * pencil.A * decomp.Q - canon.A).norm();
  v.relative_residual = std::max(v.residual_E, v.residual_A) /
                        std::max({pencil.E.norm(), pencil.A.norm(), 1.0});
  v.cond_P = condition_number(decomp.P);
  v.cond_Q = condition_number(decomp.Q);
  return v;
}

}  // namespace descest
