#pragma once

#include <Eigen/Dense>

#include "descest/model.hpp"
#include "descest/pencil.hpp"
#include "descest/rng.hpp"

namespace bench {

inline Eigen::MatrixXd random_nonsingular(int n, descest::CounterRng& rng) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) m.row(i) = rng.normal_vector(n).transpose();
  return m + 3.0 * Eigen::MatrixXd::Identity(n, n);
}

// Scrambled canonical pencil with a mix of block families, sized by dim.
inline descest::MatrixPencil scrambled_pencil(int dim, std::uint64_t seed) {
  descest::KroneckerStructure s;
  int used = 0;
  s.eps = {1};
  used += 2;
  s.nilpotent = {1};
  used += 1;
  double eig = 0.3;
  while (used + 2 <= dim) {
    s.jordan.push_back({2, descest::Eigenvalue::real(eig)});
    eig += 0.4;
    used += 2;
  }
  if (used < dim) {
    s.jordan.push_back({1, descest::Eigenvalue::real(eig)});
  }
  const descest::MatrixPencil canon = descest::assemble_canonical(s);
  descest::CounterRng rng(seed);
  return descest::apply_equivalence(
      random_nonsingular(static_cast<int>(canon.n_eq()), rng),
      random_nonsingular(static_cast<int>(canon.n()), rng), canon);
}

// Index-1 causal state-space-plus-algebraic model of n states.
inline descest::StochasticDescriptorModel bench_model(int n,
                                                      std::uint64_t seed) {
  descest::CounterRng rng(seed);
  descest::KroneckerStructure s;
  s.nilpotent = {1};
  for (int i = 1; i < n; ++i) {
    s.jordan.push_back({1, descest::Eigenvalue::real(0.9 - 0.3 * i)});
  }
  const descest::MatrixPencil canon = descest::assemble_canonical(s);
  const descest::MatrixPencil pencil = descest::apply_equivalence(
      random_nonsingular(n, rng), random_nonsingular(n, rng), canon);
  descest::StochasticDescriptorModel m;
  m.E = pencil.E;
  m.A = pencil.A;
  m.B = rng.normal_vector(n);
  m.F = random_nonsingular(n, rng) * 0.2;
  m.H = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd rr = random_nonsingular(n, rng);
  m.R = 0.05 * rr * rr.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd pp = random_nonsingular(n, rng);
  m.P0 = 0.1 * pp * pp.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
  m.r0bar = rng.normal_vector(n);
  return m;
}

}  // namespace bench
