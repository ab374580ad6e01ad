#include "descest/model.hpp"

#include <doctest.h>

#include <cmath>

#include "corpus.hpp"
#include "descest/errors.hpp"

using namespace descest;

namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(rows.begin()->size());
  Eigen::MatrixXd m(nr, nc);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

StochasticDescriptorModel scalar_model(double e, double a) {
  StochasticDescriptorModel m;
  m.E = mat({{e}});
  m.A = mat({{a}});
  m.B = mat({{1}});
  m.F = mat({{1}});
  m.H = mat({{1}});
  m.R = mat({{1}});
  m.P0 = mat({{1}});
  m.r0bar = Eigen::VectorXd::Ones(1);
  return m;
}

}  // namespace

TEST_CASE("validate accepts an ordinary scalar state space") {
  const StochasticDescriptorModel m = scalar_model(1.0, 0.9);
  const ValidationReport rep = validate(m);
  CHECK(rep.row_rank_ok);
  CHECK(rep.estimable_global);
  CHECK(rep.estimable_u_blocks);
  CHECK(rep.f_full_col_rank);
  CHECK(rep.index == 0);
  CHECK(rep.causal);
  CHECK_FALSE(rep.overdetermined_blocks_present);
  CHECK(rep.r_positive_definite);
  CHECK(rep.accepted_for_estimation());
}

TEST_CASE("over-determined blocks reject the model") {
  // Pencil containing an O-block: a zero row of the transformed pencil would
  // constrain the deterministic input.
  const MatrixPencil o = make_o_block(1);
  StochasticDescriptorModel m;
  m.E = o.E;
  m.A = o.A;
  m.B = Eigen::MatrixXd::Zero(2, 1);
  m.F = Eigen::MatrixXd::Identity(2, 2);
  m.H = mat({{1}});
  m.R = mat({{1}});
  m.P0 = Eigen::MatrixXd::Identity(2, 2);
  m.r0bar = Eigen::VectorXd::Zero(2);
  const ValidationReport rep = validate(m);
  CHECK(rep.overdetermined_blocks_present);
  // [E A] itself keeps full row rank for an O-block with eta >= 1; only a
  // zero row of the pencil breaks it. Both conditions gate estimation.
  CHECK(rep.row_rank_ok);
  CHECK_FALSE(rep.accepted_for_estimation());
  bool mentions_rows = false;
  for (const auto& d : rep.diagnostics) {
    if (d.find("zero row") != std::string::npos) mentions_rows = true;
  }
  CHECK(mentions_rows);

  SUBCASE("a zero pencil row also breaks [E A] row rank") {
    StochasticDescriptorModel z = m;
    z.E = Eigen::MatrixXd::Zero(1, 1);
    z.A = Eigen::MatrixXd::Zero(1, 1);
    z.B = Eigen::MatrixXd::Ones(1, 1);
    z.F = Eigen::MatrixXd::Identity(1, 1);
    z.H = Eigen::MatrixXd::Ones(1, 1);
    z.R = Eigen::MatrixXd::Identity(1, 1);
    z.P0 = Eigen::MatrixXd::Identity(1, 1);
    z.r0bar = Eigen::VectorXd::Zero(1);
    const ValidationReport zrep = validate(z);
    CHECK_FALSE(zrep.row_rank_ok);
    CHECK(zrep.overdetermined_blocks_present);
    CHECK_FALSE(zrep.accepted_for_estimation());
  }
}

TEST_CASE("unmeasured nilpotent state: global estimableness fails, per-block holds") {
  // E = diag(1, 0), A = diag(0, 1) is J1(0) + N1; H sees only the first
  // state. The nilpotent state has no measurement, so [E; H] loses column
  // rank, yet there is no U-block so the per-block condition is vacuous.
  StochasticDescriptorModel m;
  m.E = mat({{1, 0}, {0, 0}});
  m.A = mat({{0, 0}, {0, 1}});
  m.B = Eigen::MatrixXd::Zero(2, 1);
  m.F = Eigen::MatrixXd::Identity(2, 2);
  m.H = mat({{1, 0}});
  m.R = mat({{1}});
  m.P0 = Eigen::MatrixXd::Identity(2, 2);
  m.r0bar = Eigen::VectorXd::Zero(2);
  const ValidationReport rep = validate(m);
  CHECK_FALSE(rep.estimable_global);
  CHECK(rep.estimable_u_blocks);
  CHECK(rep.index == 1);
  CHECK(rep.causal);
  CHECK(rep.accepted_for_estimation());
}

TEST_CASE("u-block estimableness depends on the measurement map") {
  // Single U1 block: two states, one equation. The free state needs H.
  const MatrixPencil u = make_u_block(1);
  StochasticDescriptorModel m;
  m.E = u.E;
  m.A = u.A;
  m.B = Eigen::MatrixXd::Zero(1, 1);
  m.F = Eigen::MatrixXd::Identity(1, 1);
  m.R = mat({{1}});
  m.P0 = Eigen::MatrixXd::Identity(1, 1);
  m.r0bar = Eigen::VectorXd::Zero(1);
  SUBCASE("H covering the free state passes") {
    m.H = mat({{1, 0}});
    const ValidationReport rep = validate(m);
    CHECK(rep.estimable_u_blocks);
    CHECK(rep.estimable_global);
  }
  SUBCASE("H missing the free state fails") {
    m.H = mat({{0, 1}});
    const ValidationReport rep = validate(m);
    CHECK_FALSE(rep.estimable_u_blocks);
    CHECK_FALSE(rep.estimable_global);
    CHECK_FALSE(rep.accepted_for_estimation());
  }
}

TEST_CASE("reduce_f") {
  StochasticDescriptorModel m = scalar_model(1.0, 0.5);
  SUBCASE("full column rank is returned unchanged") {
    const auto [reduced, map] = reduce_f(m);
    CHECK(reduced.F.isApprox(m.F));
    CHECK(map.isApprox(Eigen::MatrixXd::Identity(1, 1)));
  }
  SUBCASE("rank-one F compresses to one column") {
    m.E = Eigen::MatrixXd::Identity(2, 2);
    m.A = 0.5 * Eigen::MatrixXd::Identity(2, 2);
    m.B = Eigen::MatrixXd::Zero(2, 1);
    m.F = mat({{1, 2}, {0, 0}});
    m.H = Eigen::MatrixXd::Identity(2, 2);
    m.R = Eigen::MatrixXd::Identity(2, 2);
    m.P0 = Eigen::MatrixXd::Identity(2, 2);
    m.r0bar = Eigen::VectorXd::Zero(2);
    const auto [reduced, map] = reduce_f(m);
    REQUIRE(reduced.F.cols() == 1);
    CHECK(reduced.F(0, 0) == doctest::Approx(std::sqrt(5.0)));
    CHECK(reduced.F(1, 0) == doctest::Approx(0.0));
    // F'F'^T must reproduce FF^T exactly and the map must be orthonormal.
    CHECK((reduced.F * reduced.F.transpose() - m.F * m.F.transpose()).norm() <=
          1e-12 * m.F.squaredNorm());
    CHECK((map * map.transpose()).isApprox(Eigen::MatrixXd::Identity(1, 1),
                                           1e-12));
    // w' = map * w stays standard normal: map rows orthonormal by SVD.
  }
  SUBCASE("zero F compresses to zero columns") {
    m.F = Eigen::MatrixXd::Zero(1, 2);
    const auto [reduced, map] = reduce_f(m);
    CHECK(reduced.F.cols() == 0);
    CHECK(map.rows() == 0);
  }
}

TEST_CASE("causality analysis") {
  SUBCASE("index 1 is always causal") {
    StochasticDescriptorModel m = scalar_model(0.0, 1.0);  // single N1 block
    const KcfDecomposition d = compute_kcf(m.pencil());
    const auto [causal, witnesses] = check_causality(m, d);
    CHECK(causal);
    CHECK(witnesses.empty());
  }
  SUBCASE("index 2 with coupling into the chain is non-causal") {
    // N2 block with B hitting the second chain state: E_N B_N != 0.
    StochasticDescriptorModel m;
    m.E = mat({{0, 1}, {0, 0}});
    m.A = Eigen::MatrixXd::Identity(2, 2);
    m.B = mat({{0}, {1}});
    m.F = Eigen::MatrixXd::Zero(2, 0);
    m.H = Eigen::MatrixXd::Identity(2, 2);
    m.R = Eigen::MatrixXd::Identity(2, 2);
    m.P0 = Eigen::MatrixXd::Identity(2, 2);
    m.r0bar = Eigen::VectorXd::Zero(2);
    const KcfDecomposition d = compute_kcf(m.pencil());
    const auto [causal, witnesses] = check_causality(m, d);
    CHECK_FALSE(causal);
    REQUIRE(witnesses.size() == 1);
    CHECK(witnesses[0].power == 1);
    CHECK(witnesses[0].norm_B > 0.1);
    const ValidationReport rep = validate(m, d);
    CHECK(rep.index == 2);
    CHECK_FALSE(rep.causal);
    CHECK_FALSE(rep.accepted_for_estimation());
  }
  SUBCASE("index 2 with vanishing products is causal") {
    StochasticDescriptorModel m;
    m.E = mat({{0, 1}, {0, 0}});
    m.A = Eigen::MatrixXd::Identity(2, 2);
    m.B = mat({{1}, {0}});
    m.F = mat({{1}, {0}});
    m.H = Eigen::MatrixXd::Identity(2, 2);
    m.R = Eigen::MatrixXd::Identity(2, 2);
    m.P0 = Eigen::MatrixXd::Identity(2, 2);
    m.r0bar = Eigen::VectorXd::Zero(2);
    const KcfDecomposition d = compute_kcf(m.pencil());
    const auto [causal, witnesses] = check_causality(m, d);
    CHECK(causal);
    REQUIRE(witnesses.size() == 1);
    CHECK(witnesses[0].norm_B <= 1e-9);
    CHECK(witnesses[0].norm_F <= 1e-9);
    const ValidationReport rep = validate(m, d);
    CHECK(rep.index == 2);
    CHECK(rep.causal);
  }
}

TEST_CASE("validation booleans are invariant under strict equivalence") {
  // Ranks are preserved by nonsingular transformations, so validating the
  // transformed model must reproduce the same findings.
  corpus::ModelOptions mo;
  mo.with_u_block = true;
  const StochasticDescriptorModel m = corpus::random_model(21, mo);
  const ValidationReport rep = validate(m);

  CounterRng rng(99);
  const Eigen::MatrixXd p =
      corpus::random_well_conditioned(static_cast<int>(m.n_eq()), 6.0, rng);
  const Eigen::MatrixXd q =
      corpus::random_well_conditioned(static_cast<int>(m.n()), 6.0, rng);
  StochasticDescriptorModel moved = m;
  moved.E = p * m.E * q;
  moved.A = p * m.A * q;
  moved.B = p * m.B;
  moved.F = p * m.F;
  moved.H = m.H * q;
  moved.r0bar = p * m.r0bar;
  moved.P0 = p * m.P0 * p.transpose();
  const ValidationReport rep2 = validate(moved);

  CHECK(rep.row_rank_ok == rep2.row_rank_ok);
  CHECK(rep.estimable_global == rep2.estimable_global);
  CHECK(rep.estimable_u_blocks == rep2.estimable_u_blocks);
  CHECK(rep.f_full_col_rank == rep2.f_full_col_rank);
  CHECK(rep.index == rep2.index);
  CHECK(rep.causal == rep2.causal);
  CHECK(rep.overdetermined_blocks_present == rep2.overdetermined_blocks_present);
}

TEST_CASE("dimension checks") {
  StochasticDescriptorModel m = scalar_model(1.0, 0.5);
  m.A = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(m.check_dimensions(), std::invalid_argument);
}
