#include "descest/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "descest/rng.hpp"

namespace descest {

MatrixPencil::MatrixPencil(Eigen::MatrixXd e, Eigen::MatrixXd a)
    : E(std::move(e)), A(std::move(a)) {
  if (E.rows() != A.rows() || E.cols() != A.cols()) {
    throw std::invalid_argument("MatrixPencil: E and A must have equal shape");
  }
  if (E.rows() < 1 || E.cols() < 1) {
    throw std::invalid_argument("MatrixPencil: need n_eq >= 1 and n >= 1");
  }
}

Eigenvalue Eigenvalue::complex_pair(double mu, double omega) {
  if (!(omega > 0.0)) {
    throw std::invalid_argument("Eigenvalue: complex pair needs omega > 0");
  }
  return {mu, omega};
}

void KroneckerStructure::check() const {
  if (eps0 < 0 || eta0 < 0) {
    throw std::invalid_argument("KroneckerStructure: negative zero-block count");
  }
  for (int e : eps) {
    if (e < 1) throw std::invalid_argument("KroneckerStructure: eps size < 1");
  }
  for (const auto& j : jordan) {
    if (j.size < 1) {
      throw std::invalid_argument("KroneckerStructure: jordan size < 1");
    }
    if (j.eig.im < 0.0) {
      throw std::invalid_argument("KroneckerStructure: eigenvalue im < 0");
    }
  }
  for (int s : nilpotent) {
    if (s < 1) {
      throw std::invalid_argument("KroneckerStructure: nilpotent size < 1");
    }
  }
  for (int h : eta) {
    if (h < 1) throw std::invalid_argument("KroneckerStructure: eta size < 1");
  }
}

Eigen::Index KroneckerStructure::rows() const {
  Eigen::Index r = eta0;
  for (int e : eps) r += e;
  for (const auto& j : jordan) r += j.rows();
  for (int s : nilpotent) r += s;
  for (int h : eta) r += h + 1;
  return r;
}

Eigen::Index KroneckerStructure::cols() const {
  Eigen::Index c = eps0;
  for (int e : eps) c += e + 1;
  for (const auto& j : jordan) c += j.rows();
  for (int s : nilpotent) c += s;
  for (int h : eta) c += h;
  return c;
}

KroneckerStructure KroneckerStructure::canonical_sorted() const {
  KroneckerStructure s = *this;
  std::sort(s.eps.begin(), s.eps.end(), std::greater<int>());
  std::sort(s.nilpotent.begin(), s.nilpotent.end(), std::greater<int>());
  std::sort(s.eta.begin(), s.eta.end(), std::greater<int>());
  std::sort(s.jordan.begin(), s.jordan.end(),
            [](const JordanBlockSpec& a, const JordanBlockSpec& b) {
              if (a.rows() != b.rows()) return a.rows() > b.rows();
              if (a.eig.re != b.eig.re) return a.eig.re < b.eig.re;
              return a.eig.im < b.eig.im;
            });
  return s;
}

bool KroneckerStructure::approx_equal(const KroneckerStructure& other,
                                      double eig_tol) const {
  const KroneckerStructure a = canonical_sorted();
  const KroneckerStructure b = other.canonical_sorted();
  if (a.eps0 != b.eps0 || a.eta0 != b.eta0) return false;
  if (a.eps != b.eps || a.nilpotent != b.nilpotent || a.eta != b.eta) {
    return false;
  }
  if (a.jordan.size() != b.jordan.size()) return false;
  for (std::size_t i = 0; i < a.jordan.size(); ++i) {
    const auto& x = a.jordan[i];
    const auto& y = b.jordan[i];
    if (x.size != y.size) return false;
    if (x.eig.is_complex_pair() != y.eig.is_complex_pair()) return false;
    const double scale =
        1.0 + std::max(std::hypot(x.eig.re, x.eig.im),
                       std::hypot(y.eig.re, y.eig.im));
    if (std::abs(x.eig.re - y.eig.re) > eig_tol * scale) return false;
    if (std::abs(x.eig.im - y.eig.im) > eig_tol * scale) return false;
  }
  return true;
}

std::vector<int> KroneckerStructure::free_state_columns() const {
  std::vector<int> cols;
  int off = 0;
  for (int i = 0; i < eps0; ++i) cols.push_back(off++);
  for (int e : eps) {
    cols.push_back(off);
    off += e + 1;
  }
  return cols;
}

std::string KroneckerStructure::to_string() const {
  std::ostringstream os;
  os << "eps0=" << eps0 << " eps=[";
  for (std::size_t i = 0; i < eps.size(); ++i) os << (i ? "," : "") << eps[i];
  os << "] jordan=[";
  for (std::size_t i = 0; i < jordan.size(); ++i) {
    if (i) os << ",";
    os << "(" << jordan[i].size << "," << jordan[i].eig.re;
    if (jordan[i].eig.is_complex_pair()) os << "+-" << jordan[i].eig.im << "i";
    os << ")";
  }
  os << "] nilpotent=[";
  for (std::size_t i = 0; i < nilpotent.size(); ++i) {
    os << (i ? "," : "") << nilpotent[i];
  }
  os << "] eta=[";
  for (std::size_t i = 0; i < eta.size(); ++i) os << (i ? "," : "") << eta[i];
  os << "] eta0=" << eta0;
  return os.str();
}

MatrixPencil make_u_block(int eps) {
  if (eps < 1) throw std::invalid_argument("make_u_block: eps must be >= 1");
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(eps, eps + 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(eps, eps + 1);
  for (int i = 0; i < eps; ++i) {
    e(i, i + 1) = 1.0;
    a(i, i) = 1.0;
  }
  return {std::move(e), std::move(a)};
}

MatrixPencil make_j_block(int size, const Eigenvalue& eig) {
  if (size < 1) throw std::invalid_argument("make_j_block: size must be >= 1");
  if (!eig.is_complex_pair()) {
    if (eig.im != 0.0) {
      throw std::invalid_argument("make_j_block: eigenvalue im must be >= 0");
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
    for (int i = 0; i < size; ++i) {
      a(i, i) = eig.re;
      if (i + 1 < size) a(i, i + 1) = 1.0;
    }
    return {Eigen::MatrixXd::Identity(size, size), std::move(a)};
  }
  const int n = 2 * size;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < size; ++i) {
    a(2 * i, 2 * i) = eig.re;
    a(2 * i, 2 * i + 1) = eig.im;
    a(2 * i + 1, 2 * i) = -eig.im;
    a(2 * i + 1, 2 * i + 1) = eig.re;
    if (i + 1 < size) {
      a(2 * i, 2 * i + 2) = 1.0;
      a(2 * i + 1, 2 * i + 3) = 1.0;
    }
  }
  return {Eigen::MatrixXd::Identity(n, n), std::move(a)};
}

MatrixPencil make_n_block(int size) {
  if (size < 1) throw std::invalid_argument("make_n_block: size must be >= 1");
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(size, size);
  for (int i = 0; i + 1 < size; ++i) e(i, i + 1) = 1.0;
  return {std::move(e), Eigen::MatrixXd::Identity(size, size)};
}

MatrixPencil make_o_block(int eta) {
  if (eta < 1) throw std::invalid_argument("make_o_block: eta must be >= 1");
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(eta + 1, eta);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(eta + 1, eta);
  for (int i = 0; i < eta; ++i) {
    e(i, i) = 1.0;
    a(i + 1, i) = 1.0;
  }
  return {std::move(e), std::move(a)};
}

MatrixPencil assemble_canonical(const KroneckerStructure& structure) {
  const KroneckerStructure& s = structure;
  s.check();
  const Eigen::Index m = s.rows();
  const Eigen::Index n = s.cols();
  if (m < 1 || n < 1) {
    throw std::invalid_argument(
        "assemble_canonical: structure has an empty dimension");
  }
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(m, n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n);
  Eigen::Index r = 0;
  Eigen::Index c = s.eps0;  // zero columns first
  auto place = [&](const MatrixPencil& blk) {
    e.block(r, c, blk.n_eq(), blk.n()) = blk.E;
    a.block(r, c, blk.n_eq(), blk.n()) = blk.A;
    r += blk.n_eq();
    c += blk.n();
  };
  for (int eps : s.eps) place(make_u_block(eps));
  for (const auto& j : s.jordan) place(make_j_block(j.size, j.eig));
  for (int sig : s.nilpotent) place(make_n_block(sig));
  for (int eta : s.eta) place(make_o_block(eta));
  // eta0 zero rows occupy the remaining bottom rows
  return {std::move(e), std::move(a)};
}

MatrixPencil apply_equivalence(const Eigen::MatrixXd& p,
                               const Eigen::MatrixXd& q,
                               const MatrixPencil& pencil, double tol) {
  if (p.rows() != p.cols() || p.rows() != pencil.n_eq()) {
    throw std::invalid_argument("apply_equivalence: P must be n_eq x n_eq");
  }
  if (q.rows() != q.cols() || q.rows() != pencil.n()) {
    throw std::invalid_argument("apply_equivalence: Q must be n x n");
  }
  if (!is_nonsingular(p, tol)) {
    throw std::invalid_argument("apply_equivalence: P is singular");
  }
  if (!is_nonsingular(q, tol)) {
    throw std::invalid_argument("apply_equivalence: Q is singular");
  }
  return {p * pencil.E * q, p * pencil.A * q};
}

bool is_regular(const MatrixPencil& pencil, double tol) {
  if (pencil.n_eq() != pencil.n()) return false;
  const Eigen::Index n = pencil.n();
  std::vector<double> probes = {0.0, 1.0, -1.0, 2.0, std::numbers::pi};
  CounterRng rng(0x7e9c11a5u, /*stream=*/42);
  for (int i = 0; i < 3; ++i) probes.push_back(4.0 * rng.uniform() - 2.0);
  for (double lam : probes) {
    if (rank_of(pencil.eval(lam), tol) == n) return true;
  }
  return false;
}

}  // namespace descest
