#include "corpus.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace corpus {

using descest::CounterRng;
using descest::Eigenvalue;
using descest::JordanBlockSpec;
using descest::KroneckerStructure;
using descest::MatrixPencil;
using descest::StochasticDescriptorModel;

Eigen::MatrixXd random_orthogonal(int n, CounterRng& rng) {
  if (n == 0) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i) g.row(i) = rng.normal_vector(n).transpose();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Fix signs so the factor is unique given the draw.
  for (int i = 0; i < n; ++i) {
    if (qr.matrixQR()(i, i) < 0) q.col(i) = -q.col(i);
  }
  return q;
}

Eigen::MatrixXd random_well_conditioned(int n, double cond, CounterRng& rng) {
  Eigen::MatrixXd u = random_orthogonal(n, rng);
  Eigen::MatrixXd v = random_orthogonal(n, rng);
  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i) {
    const double t = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
    s(i) = std::pow(cond, -t);  // 1 down to 1/cond
  }
  return u * s.asDiagonal() * v.transpose();
}

KroneckerStructure random_structure(std::uint64_t seed, int max_dim) {
  CounterRng rng(seed, 101);
  // Pool of well-separated eigenvalues, consumed in random order.
  std::vector<double> pool = {-1.2, -0.8, -0.45, 0.3, 0.55, 0.8, 1.1, 1.5};
  for (std::size_t i = pool.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(pool[i - 1], pool[j]);
  }
  std::size_t pool_next = 0;

  KroneckerStructure s;
  int rows = 0;
  int cols = 0;
  auto fits = [&](int dr, int dc) {
    return rows + dr <= max_dim && cols + dc <= max_dim;
  };
  const int attempts = 3 + static_cast<int>(rng.next_u64() % 6);
  for (int a = 0; a < attempts; ++a) {
    const int kind = static_cast<int>(rng.next_u64() % 8);
    const int size = 1 + static_cast<int>(rng.next_u64() % 3);
    switch (kind) {
      case 0:  // zero column
        if (fits(0, 1)) {
          ++s.eps0;
          cols += 1;
        }
        break;
      case 1:  // under-determined block
        if (fits(size, size + 1)) {
          s.eps.push_back(size);
          rows += size;
          cols += size + 1;
        }
        break;
      case 2:
      case 3: {  // real Jordan block
        if (fits(size, size) && pool_next < pool.size()) {
          s.jordan.push_back({size, Eigenvalue::real(pool[pool_next++])});
          rows += size;
          cols += size;
        }
        break;
      }
      case 4: {  // complex-pair Jordan block
        const int blk = std::min(size, 2);
        if (fits(2 * blk, 2 * blk) && pool_next < pool.size()) {
          const double omega = rng.uniform() < 0.5 ? 0.5 : 0.9;
          s.jordan.push_back(
              {blk, Eigenvalue::complex_pair(pool[pool_next++], omega)});
          rows += 2 * blk;
          cols += 2 * blk;
        }
        break;
      }
      case 5:  // nilpotent block
        if (fits(size, size)) {
          s.nilpotent.push_back(size);
          rows += size;
          cols += size;
        }
        break;
      case 6:  // over-determined block
        if (fits(size + 1, size)) {
          s.eta.push_back(size);
          rows += size + 1;
          cols += size;
        }
        break;
      case 7:  // zero row
        if (fits(1, 0)) {
          ++s.eta0;
          rows += 1;
        }
        break;
    }
  }
  // Occasionally revisit an eigenvalue with a second block, exercising the
  // multi-block clustering path.
  if (!s.jordan.empty() && rng.uniform() < 0.3 && fits(1, 1)) {
    s.jordan.push_back({1, s.jordan.front().eig});
    rows += s.jordan.back().rows();
    cols += s.jordan.back().rows();
  }
  if (rows == 0 || cols == 0) {
    s.jordan.push_back({1, Eigenvalue::real(pool[pool_next % pool.size()])});
  }
  return s.canonical_sorted();
}

MatrixPencil scrambled_canonical(const KroneckerStructure& structure,
                                 std::uint64_t seed, double cond) {
  const MatrixPencil canon = descest::assemble_canonical(structure);
  CounterRng rng(seed, 202);
  const double cp = 1.0 + rng.uniform() * (cond - 1.0);
  const double cq = 1.0 + rng.uniform() * (cond - 1.0);
  const Eigen::MatrixXd p =
      random_well_conditioned(static_cast<int>(canon.n_eq()), cp, rng);
  const Eigen::MatrixXd q =
      random_well_conditioned(static_cast<int>(canon.n()), cq, rng);
  return descest::apply_equivalence(p, q, canon);
}

StochasticDescriptorModel random_model(std::uint64_t seed,
                                       const ModelOptions& options) {
  CounterRng rng(seed, 303);
  KroneckerStructure s;
  int cols = 0;
  int rows = 0;
  if (options.with_u_block) {
    s.eps.push_back(1);
    rows += 1;
    cols += 2;
  }
  if (options.with_nilpotent && cols + 1 <= options.max_states) {
    s.nilpotent.push_back(1);
    rows += 1;
    cols += 1;
  }
  const std::vector<double> pool = {0.85, -0.6, 0.35, -0.2};
  std::size_t pi = 0;
  while (cols < options.max_states && pi < pool.size()) {
    s.jordan.push_back({1, Eigenvalue::real(pool[pi++])});
    rows += 1;
    cols += 1;
  }
  const MatrixPencil pencil = scrambled_canonical(
      s.canonical_sorted(), seed ^ 0x9177, options.scramble_cond);

  const auto n_eq = pencil.n_eq();
  const auto n = pencil.n();
  StochasticDescriptorModel model;
  model.E = pencil.E;
  model.A = pencil.A;
  model.B = Eigen::MatrixXd(n_eq, 1);
  for (Eigen::Index i = 0; i < n_eq; ++i) model.B(i, 0) = rng.normal();
  model.F = 0.6 * random_well_conditioned(static_cast<int>(n_eq), 4.0, rng);
  // Square measurement map close to identity keeps every state (including
  // free states of U-blocks) estimable.
  model.H = Eigen::MatrixXd::Identity(n, n) +
            0.25 * random_well_conditioned(static_cast<int>(n), 3.0, rng);
  Eigen::MatrixXd rr = random_well_conditioned(static_cast<int>(n), 3.0, rng);
  model.R = 0.2 * (rr * rr.transpose()) +
            0.05 * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd pp =
      random_well_conditioned(static_cast<int>(n_eq), 3.0, rng);
  model.P0 = 0.5 * (pp * pp.transpose()) +
             0.1 * Eigen::MatrixXd::Identity(n_eq, n_eq);
  model.r0bar = rng.normal_vector(static_cast<int>(n_eq));
  return model;
}

Eigen::MatrixXd random_inputs(Eigen::Index j, int horizon,
                              std::uint64_t seed) {
  CounterRng rng(seed, 404);
  Eigen::MatrixXd u(j, horizon + 1);
  for (Eigen::Index i = 0; i < j; ++i) {
    const double a = rng.normal();
    const double b = rng.normal();
    const double w = 0.2 + 0.5 * rng.uniform();
    for (int k = 0; k <= horizon; ++k) {
      u(i, k) = a * std::sin(w * k) + 0.3 * b;
    }
  }
  return u;
}

}  // namespace corpus
