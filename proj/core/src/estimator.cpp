#include "descest/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "descest/errors.hpp"

namespace descest {

namespace {

Eigen::MatrixXd vstack(const std::vector<Eigen::MatrixXd>& blocks,
                       Eigen::Index cols) {
  Eigen::Index rows = 0;
  for (const auto& b : blocks) rows += b.rows();
  Eigen::MatrixXd out(rows, cols);
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

Eigen::VectorXd vcat(const std::vector<Eigen::VectorXd>& parts) {
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.size();
  Eigen::VectorXd out(rows);
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    out.segment(r, p.size()) = p;
    r += p.size();
  }
  return out;
}

// Whitened rows of the stacked least-squares system, grouped per time step.
// C0 rows touch x_k only; (C1, D1) rows touch x_k and x_{k+1}.
struct Stage {
  Eigen::MatrixXd C0;
  Eigen::VectorXd d0;
  Eigen::MatrixXd C1;
  Eigen::MatrixXd D1;
  Eigen::VectorXd d1;
};

struct SweepResult {
  Eigen::MatrixXd states;  // n x (T+1)
  double condition_estimate = 0.0;
};

// Forward orthogonal elimination of the block-bidiagonal system followed by
// back-substitution (square-root information sweep). All rows touching x_k
// are present once stage k is processed, so a rank deficit found there is a
// rank deficit of the whole stacked matrix.
SweepResult solve_block_bidiagonal(const std::vector<Stage>& stages,
                                   Eigen::Index n, double tol) {
  const int t_end = static_cast<int>(stages.size()) - 1;
  struct BackStep {
    Eigen::MatrixXd r;     // n x n upper triangular
    Eigen::MatrixXd perm;  // column permutation of the pivoted QR
    Eigen::MatrixXd d;     // n x n coupling to x_{k+1} (zero rows for k = T)
    Eigen::VectorXd z;
  };
  std::vector<BackStep> back(t_end + 1);

  Eigen::MatrixXd carry_c(0, n);
  Eigen::VectorXd carry_rhs(0);
  double piv_max = 0.0;
  double piv_min = std::numeric_limits<double>::infinity();

  for (int k = 0; k <= t_end; ++k) {
    const Stage& st = stages[k];
    const bool last = k == t_end;
    const Eigen::Index rows =
        carry_c.rows() + st.C0.rows() + (last ? 0 : st.C1.rows());
    Eigen::MatrixXd c(rows, n);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, n);
    Eigen::VectorXd rhs(rows);
    Eigen::Index r = 0;
    c.middleRows(r, carry_c.rows()) = carry_c;
    rhs.segment(r, carry_rhs.size()) = carry_rhs;
    r += carry_c.rows();
    c.middleRows(r, st.C0.rows()) = st.C0;
    rhs.segment(r, st.d0.size()) = st.d0;
    r += st.C0.rows();
    if (!last) {
      c.middleRows(r, st.C1.rows()) = st.C1;
      d.middleRows(r, st.D1.rows()) = st.D1;
      rhs.segment(r, st.d1.size()) = st.d1;
    }

    if (rows < n) {
      throw Unestimable("state x_" + std::to_string(k) +
                        " is under-determined by the stacked system");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(c);
    qr.setThreshold(tol * static_cast<double>(std::max(rows, n)));
    if (qr.rank() < n) {
      throw Unestimable(
          "stacked coefficient matrix is column-rank deficient at step " +
          std::to_string(k));
    }
    const Eigen::MatrixXd qt_d = qr.householderQ().transpose() * d;
    const Eigen::VectorXd qt_rhs = qr.householderQ().transpose() * rhs;

    BackStep bs;
    bs.r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    bs.perm = qr.colsPermutation();
    bs.d = qt_d.topRows(n);
    bs.z = qt_rhs.head(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = std::abs(bs.r(i, i));
      piv_max = std::max(piv_max, a);
      piv_min = std::min(piv_min, a);
    }
    back[k] = std::move(bs);

    carry_c = qt_d.bottomRows(rows - n);
    carry_rhs = qt_rhs.tail(rows - n);
    if (carry_c.rows() > n) {
      Eigen::HouseholderQR<Eigen::MatrixXd> cqr(carry_c);
      const Eigen::VectorXd rr =
          (cqr.householderQ().transpose() * carry_rhs).head(n);
      carry_c = Eigen::MatrixXd(
          cqr.matrixQR().topRows(n).triangularView<Eigen::Upper>());
      carry_rhs = rr;
    }
  }

  SweepResult out;
  out.states.resize(n, t_end + 1);
  out.condition_estimate =
      piv_min > 0.0 ? piv_max / piv_min
                    : std::numeric_limits<double>::infinity();
  Eigen::VectorXd next;
  for (int k = t_end; k >= 0; --k) {
    const BackStep& bs = back[k];
    Eigen::VectorXd rhs = bs.z;
    if (k < t_end) rhs -= bs.d * next;
    const Eigen::VectorXd y =
        bs.r.triangularView<Eigen::Upper>().solve(rhs);
    next = bs.perm * y;
    out.states.col(k) = next;
  }
  return out;
}

struct Weights {
  CovarianceWeight p0;
  CovarianceWeight r;
  CovarianceWeight dyn;  // FF^T (or the transformed counterpart)
};

void check_data_dims(const StochasticDescriptorModel& model,
                     const Eigen::MatrixXd& y, const Eigen::MatrixXd& u) {
  if (y.rows() != model.n_outputs()) {
    throw std::invalid_argument("estimator: y must have m rows");
  }
  if (u.rows() != model.n_inputs()) {
    throw std::invalid_argument("estimator: u must have j rows");
  }
  if (y.cols() != u.cols() || y.cols() < 1) {
    throw std::invalid_argument(
        "estimator: y and u must both have T+1 >= 1 columns");
  }
}

ValidationReport ensure_validated(const StochasticDescriptorModel& model,
                                  const ValidationReport* report, double tol) {
  ValidationReport rep = report ? *report : validate(model, tol);
  if (!rep.accepted_for_estimation()) {
    std::ostringstream os;
    os << "model rejected for estimation:";
    for (const auto& d : rep.diagnostics) os << "\n  - " << d;
    throw ModelRejected(os.str());
  }
  return rep;
}

// Batch objective, its per-term residuals and its gradient, evaluated with
// pseudo-inverse quadratic forms so semidefinite weights are handled
// uniformly.
void fill_estimate_terms(const StochasticDescriptorModel& model,
                         const Eigen::MatrixXd& y, const Eigen::MatrixXd& u,
                         const Weights& w, MapEstimate* est) {
  const int t_end = static_cast<int>(y.cols()) - 1;
  const Eigen::MatrixXd& x = est->states;
  est->prior_residual = model.E * x.col(0) - model.r0bar;
  est->measurement_residuals = y - model.H * x;
  est->dynamics_residuals.resize(model.n_eq(), t_end);
  for (int k = 0; k < t_end; ++k) {
    est->dynamics_residuals.col(k) =
        model.E * x.col(k + 1) - model.A * x.col(k) - model.B * u.col(k);
  }
  double obj = 0.5 * w.p0.quad(est->prior_residual);
  for (int k = 0; k <= t_end; ++k) {
    obj += 0.5 * w.r.quad(est->measurement_residuals.col(k));
  }
  for (int k = 0; k < t_end; ++k) {
    obj += 0.5 * w.dyn.quad(est->dynamics_residuals.col(k));
  }
  est->objective_value = obj;

  auto gradient_norm_at = [&](const Eigen::MatrixXd& xs) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(model.n(), t_end + 1);
    g.col(0) +=
        model.E.transpose() *
        w.p0.apply_pinv(Eigen::VectorXd(model.E * xs.col(0) - model.r0bar));
    for (int k = 0; k <= t_end; ++k) {
      g.col(k) -= model.H.transpose() *
                  w.r.apply_pinv(Eigen::VectorXd(y.col(k) - model.H * xs.col(k)));
    }
    for (int k = 0; k < t_end; ++k) {
      const Eigen::VectorXd res = model.E * xs.col(k + 1) -
                                  model.A * xs.col(k) - model.B * u.col(k);
      const Eigen::VectorXd wres = w.dyn.apply_pinv(res);
      g.col(k) -= model.A.transpose() * wres;
      g.col(k + 1) += model.E.transpose() * wres;
    }
    return g.norm();
  };
  est->diagnostics.gradient_norm = gradient_norm_at(x);
  est->diagnostics.gradient_reference =
      gradient_norm_at(Eigen::MatrixXd::Zero(model.n(), t_end + 1));
}

std::vector<Stage> batch_stages(const StochasticDescriptorModel& model,
                                const Eigen::MatrixXd& y,
                                const Eigen::MatrixXd& u, const Weights& w) {
  const int t_end = static_cast<int>(y.cols()) - 1;
  const Eigen::Index n = model.n();
  const Eigen::MatrixXd meas_c = w.r.whitener() * model.H;
  const Eigen::MatrixXd dyn_c = -(w.dyn.whitener() * model.A);
  const Eigen::MatrixXd dyn_d = w.dyn.whitener() * model.E;
  std::vector<Stage> stages(t_end + 1);
  for (int k = 0; k <= t_end; ++k) {
    Stage& st = stages[k];
    if (k == 0) {
      st.C0 = vstack({w.p0.whitener() * model.E, meas_c}, n);
      st.d0 = vcat({w.p0.whitener() * model.r0bar, w.r.whitener() * y.col(0)});
    } else {
      st.C0 = meas_c;
      st.d0 = w.r.whitener() * y.col(k);
    }
    if (k < t_end) {
      st.C1 = dyn_c;
      st.D1 = dyn_d;
      st.d1 = w.dyn.whitener() * (model.B * u.col(k));
    }
  }
  return stages;
}

}  // namespace

MapEstimate solve_map_batch(const StochasticDescriptorModel& model,
                            const Eigen::MatrixXd& y, const Eigen::MatrixXd& u,
                            const ValidationReport* report, double tol) {
  model.check_dimensions();
  check_data_dims(model, y, u);
  ensure_validated(model, report, tol);

  Weights w{CovarianceWeight(model.P0, tol), CovarianceWeight(model.R, tol),
            CovarianceWeight(model.F * model.F.transpose(), tol)};
  if (!w.dyn.positive_definite()) {
    throw SingularWeight(
        "FF^T is singular: the weighted batch objective is undefined; use "
        "solve_map_constrained");
  }
  const std::vector<Stage> stages = batch_stages(model, y, u, w);
  SweepResult sweep = solve_block_bidiagonal(stages, model.n(), tol);

  MapEstimate est;
  est.states = std::move(sweep.states);
  est.diagnostics.condition_estimate = sweep.condition_estimate;
  fill_estimate_terms(model, y, u, w, &est);
  return est;
}

MapEstimate solve_map_constrained(const StochasticDescriptorModel& model,
                                  const Eigen::MatrixXd& y,
                                  const Eigen::MatrixXd& u,
                                  const ValidationReport* report, double tol) {
  model.check_dimensions();
  check_data_dims(model, y, u);
  const ValidationReport rep = ensure_validated(model, report, tol);
  if (!rep.f_full_col_rank) {
    throw ModelRejected(
        "solve_map_constrained: F must have full column rank; apply reduce_f "
        "first");
  }

  const int t_end = static_cast<int>(y.cols()) - 1;
  const Eigen::Index n = model.n();
  const Eigen::Index neq = model.n_eq();
  const Eigen::Index p = model.n_disturbances();
  const Eigen::Index nx = n * (t_end + 1);
  const Eigen::Index nw = p * t_end;
  const Eigen::Index nc = neq * t_end;

  const CovarianceWeight p0w(model.P0, tol);
  const CovarianceWeight rw(model.R, tol);

  // Least-squares rows over z = (x, w).
  const Eigen::Index nls =
      p0w.whitener().rows() + rw.whitener().rows() * (t_end + 1) + nw;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(nls, nx + nw);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(nls);
  Eigen::Index row = 0;
  c.block(row, 0, p0w.whitener().rows(), n) = p0w.whitener() * model.E;
  d.segment(row, p0w.whitener().rows()) = p0w.whitener() * model.r0bar;
  row += p0w.whitener().rows();
  for (int k = 0; k <= t_end; ++k) {
    c.block(row, k * n, rw.whitener().rows(), n) = rw.whitener() * model.H;
    d.segment(row, rw.whitener().rows()) = rw.whitener() * y.col(k);
    row += rw.whitener().rows();
  }
  c.block(row, nx, nw, nw) = Eigen::MatrixXd::Identity(nw, nw);
  row += nw;

  // E x_{k+1} - A x_k - F w_k = B u_k.
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(nc, nx + nw);
  Eigen::VectorXd h(nc);
  for (int k = 0; k < t_end; ++k) {
    g.block(k * neq, k * n, neq, n) = -model.A;
    g.block(k * neq, (k + 1) * n, neq, n) = model.E;
    g.block(k * neq, nx + k * p, neq, p) = -model.F;
    h.segment(k * neq, neq) = model.B * u.col(k);
  }

  const Eigen::Index dim = nx + nw + nc;
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
  kkt.topLeftCorner(nx + nw, nx + nw) = c.transpose() * c;
  kkt.block(0, nx + nw, nx + nw, nc) = g.transpose();
  kkt.block(nx + nw, 0, nc, nx + nw) = g;
  Eigen::VectorXd rhs(dim);
  rhs.head(nx + nw) = c.transpose() * d;
  rhs.tail(nc) = h;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  lu.setThreshold(tol * static_cast<double>(dim));
  const double scale = std::max({h.norm(), d.norm(), 1.0});
  if (!lu.isInvertible()) {
    // Distinguish an infeasible constraint set from an under-determined one.
    const Eigen::VectorXd z_feas =
        g.completeOrthogonalDecomposition().solve(h);
    if ((g * z_feas - h).norm() > 1e-8 * scale) {
      throw Infeasible(
          "solve_map_constrained: dynamics constraints admit no solution");
    }
    throw Unestimable(
        "solve_map_constrained: KKT system singular; some state direction is "
        "undetermined");
  }
  const Eigen::VectorXd sol = lu.solve(rhs);
  const Eigen::VectorXd z = sol.head(nx + nw);
  if ((g * z - h).norm() > 1e-7 * scale) {
    throw Infeasible(
        "solve_map_constrained: constraint residual too large after solve");
  }

  MapEstimate est;
  est.states.resize(n, t_end + 1);
  for (int k = 0; k <= t_end; ++k) est.states.col(k) = z.segment(k * n, n);
  est.diagnostics.condition_estimate = kkt.norm() * lu.inverse().norm();

  const Weights w{p0w, rw,
                  CovarianceWeight(model.F * model.F.transpose(), tol)};
  fill_estimate_terms(model, y, u, w, &est);
  // KKT residuals replace the plain gradient: stationarity over (x, w) plus
  // primal feasibility.
  const Eigen::VectorXd stat =
      c.transpose() * (c * z) + g.transpose() * sol.tail(nc) -
      c.transpose() * d;
  est.diagnostics.gradient_norm =
      std::max(stat.norm(), (g * z - h).norm());
  est.diagnostics.gradient_reference = rhs.norm();
  return est;
}

MapEstimate solve_map_transformed(const StochasticDescriptorModel& model,
                                  const KcfDecomposition& decomp,
                                  const Eigen::MatrixXd& y,
                                  const Eigen::MatrixXd& u, double q,
                                  const Eigen::VectorXd& mu_u, double tol) {
  model.check_dimensions();
  check_data_dims(model, y, u);
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw std::invalid_argument("solve_map_transformed: need finite q > 0");
  }
  const ValidationReport rep = validate(model, decomp, tol);
  if (!rep.accepted_for_estimation()) {
    std::ostringstream os;
    os << "model rejected for estimation:";
    for (const auto& diag : rep.diagnostics) os << "\n  - " << diag;
    throw ModelRejected(os.str());
  }

  const int t_end = static_cast<int>(y.cols()) - 1;
  const Eigen::Index n = model.n();
  const MatrixPencil canon = assemble_canonical(decomp.structure);
  const TransformedSystem sys =
      partition_transformed(decomp, model.B, model.F, model.H);

  const CovarianceWeight p0t(
      decomp.P * model.P0 * decomp.P.transpose(), tol);
  const CovarianceWeight rw(model.R, tol);
  const CovarianceWeight dynw(sys.F_tilde * sys.F_tilde.transpose(), tol);
  if (!dynw.positive_definite()) {
    throw SingularWeight(
        "transformed dynamics weight (PF)(PF)^T is singular; use "
        "solve_map_constrained");
  }
  const Eigen::VectorXd prior_mean = decomp.P * model.r0bar;

  const std::vector<int> free_cols = decomp.structure.free_state_columns();
  const auto d_free = static_cast<Eigen::Index>(free_cols.size());
  Eigen::VectorXd mu = mu_u;
  if (mu.size() == 0) mu = Eigen::VectorXd::Zero(d_free);
  if (mu.size() != d_free) {
    throw std::invalid_argument(
        "solve_map_transformed: mu_u size must match the free-state count");
  }
  Eigen::MatrixXd free_rows = Eigen::MatrixXd::Zero(d_free, n);
  for (Eigen::Index i = 0; i < d_free; ++i) {
    free_rows(i, free_cols[static_cast<std::size_t>(i)]) = 1.0 / q;
  }

  const Eigen::MatrixXd meas_c = rw.whitener() * sys.H_tilde;
  const Eigen::MatrixXd dyn_c = -(dynw.whitener() * canon.A);
  const Eigen::MatrixXd dyn_d = dynw.whitener() * canon.E;
  std::vector<Stage> stages(t_end + 1);
  for (int k = 0; k <= t_end; ++k) {
    Stage& st = stages[k];
    std::vector<Eigen::MatrixXd> c0{meas_c, free_rows};
    std::vector<Eigen::VectorXd> d0{rw.whitener() * y.col(k), mu / q};
    if (k == 0) {
      c0.insert(c0.begin(), p0t.whitener() * canon.E);
      d0.insert(d0.begin(), p0t.whitener() * prior_mean);
    }
    st.C0 = vstack(c0, n);
    st.d0 = vcat(d0);
    if (k < t_end) {
      st.C1 = dyn_c;
      st.D1 = dyn_d;
      st.d1 = dynw.whitener() * (sys.B_tilde * u.col(k));
    }
  }
  SweepResult sweep = solve_block_bidiagonal(stages, n, tol);
  const Eigen::MatrixXd x_tilde = sweep.states;

  MapEstimate est;
  est.states = decomp.Q * x_tilde;
  est.diagnostics.condition_estimate = sweep.condition_estimate;
  const Weights w{CovarianceWeight(model.P0, tol), rw,
                  CovarianceWeight(model.F * model.F.transpose(), tol)};
  fill_estimate_terms(model, y, u, w, &est);

  // Gradient of the transformed objective (including the free-state
  // penalty), which is what this solver actually minimized.
  auto grad_norm_at = [&](const Eigen::MatrixXd& xt) {
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, t_end + 1);
    grad.col(0) += canon.E.transpose() *
                   p0t.apply_pinv(
                       Eigen::VectorXd(canon.E * xt.col(0) - prior_mean));
    for (int k = 0; k <= t_end; ++k) {
      grad.col(k) -=
          sys.H_tilde.transpose() *
          rw.apply_pinv(Eigen::VectorXd(y.col(k) - sys.H_tilde * xt.col(k)));
      for (Eigen::Index i = 0; i < d_free; ++i) {
        const int cidx = free_cols[static_cast<std::size_t>(i)];
        grad(cidx, k) += (xt(cidx, k) - mu(i)) / (q * q);
      }
    }
    for (int k = 0; k < t_end; ++k) {
      const Eigen::VectorXd res = canon.E * xt.col(k + 1) -
                                  canon.A * xt.col(k) -
                                  sys.B_tilde * u.col(k);
      const Eigen::VectorXd wres = dynw.apply_pinv(res);
      grad.col(k) -= canon.A.transpose() * wres;
      grad.col(k + 1) += canon.E.transpose() * wres;
    }
    return grad.norm();
  };
  est.diagnostics.gradient_norm = grad_norm_at(x_tilde);
  est.diagnostics.gradient_reference =
      grad_norm_at(Eigen::MatrixXd::Zero(n, t_end + 1));
  return est;
}

MapEstimate solve_ml(const StochasticDescriptorModel& model,
                     const Eigen::MatrixXd& y, const Eigen::MatrixXd& u,
                     const ValidationReport* report, double tol) {
  model.check_dimensions();
  check_data_dims(model, y, u);
  ensure_validated(model, report, tol);

  // Observation-model realization of the prior constraint set: r0bar is a
  // noisy reading of E x_0 (covariance P0) and each B u_k a noisy reading of
  // E x_{k+1} - A x_k (covariance FF^T), next to the actual measurements.
  struct Observation {
    int k = 0;              // time index of the x_k factor
    Eigen::MatrixXd on_xk;  // coefficient on x_k
    Eigen::MatrixXd on_xk1; // coefficient on x_{k+1} (empty if none)
    Eigen::VectorXd value;
    const CovarianceWeight* noise = nullptr;
  };
  const CovarianceWeight p0w(model.P0, tol);
  const CovarianceWeight rw(model.R, tol);
  const CovarianceWeight dynw(model.F * model.F.transpose(), tol);
  if (!dynw.positive_definite()) {
    throw SingularWeight(
        "FF^T is singular: the likelihood over the input observations is "
        "undefined; use solve_map_constrained");
  }

  const int t_end = static_cast<int>(y.cols()) - 1;
  std::vector<Observation> observations;
  observations.push_back({0, model.E, {}, model.r0bar, &p0w});
  for (int k = 0; k <= t_end; ++k) {
    observations.push_back({k, model.H, {}, y.col(k), &rw});
  }
  for (int k = 0; k < t_end; ++k) {
    observations.push_back({k, -model.A, model.E, model.B * u.col(k), &dynw});
  }

  const Eigen::Index n = model.n();
  std::vector<Stage> stages(t_end + 1);
  std::vector<std::vector<Eigen::MatrixXd>> c0(t_end + 1);
  std::vector<std::vector<Eigen::VectorXd>> d0(t_end + 1);
  for (const auto& obs : observations) {
    const Eigen::MatrixXd wc = obs.noise->whitener() * obs.on_xk;
    const Eigen::VectorXd wv = obs.noise->whitener() * obs.value;
    if (obs.on_xk1.size() == 0) {
      c0[obs.k].push_back(wc);
      d0[obs.k].push_back(wv);
    } else {
      Stage& st = stages[obs.k];
      st.C1 = wc;
      st.D1 = obs.noise->whitener() * obs.on_xk1;
      st.d1 = wv;
    }
  }
  for (int k = 0; k <= t_end; ++k) {
    stages[k].C0 = vstack(c0[k], n);
    stages[k].d0 = vcat(d0[k]);
  }
  SweepResult sweep = solve_block_bidiagonal(stages, n, tol);

  MapEstimate est;
  est.states = std::move(sweep.states);
  est.diagnostics.condition_estimate = sweep.condition_estimate;
  const Weights w{p0w, rw, dynw};
  fill_estimate_terms(model, y, u, w, &est);
  return est;
}

RecursiveEstimate solve_recursive(const StochasticDescriptorModel& model,
                                  const Eigen::MatrixXd& y,
                                  const Eigen::MatrixXd& u,
                                  const ValidationReport* report, double tol) {
  model.check_dimensions();
  check_data_dims(model, y, u);
  const ValidationReport rep = ensure_validated(model, report, tol);
  if (rep.index > 1) {
    throw ModelRejected(
        "solve_recursive: requires an index <= 1 model; use the batch solver "
        "for causal higher-index models");
  }
  if (!rep.estimable_global) {
    throw ModelRejected(
        "solve_recursive: requires [E; H] of full column rank (per-step "
        "estimableness)");
  }
  const CovarianceWeight p0w(model.P0, tol);
  const CovarianceWeight rw(model.R, tol);
  const CovarianceWeight dynw(model.F * model.F.transpose(), tol);
  if (!dynw.positive_definite()) {
    throw SingularWeight("solve_recursive: FF^T must be positive definite");
  }

  const int t_end = static_cast<int>(y.cols()) - 1;
  const Eigen::Index n = model.n();
  const Eigen::MatrixXd ht_rinv_h =
      model.H.transpose() * rw.apply_pinv(model.H);
  const Eigen::MatrixXd w_a = dynw.apply_pinv(model.A);
  const Eigen::MatrixXd w_e = dynw.apply_pinv(model.E);

  RecursiveEstimate out;
  out.filtered.resize(n, t_end + 1);
  Eigen::MatrixXd omega =
      model.E.transpose() * p0w.apply_pinv(model.E);
  Eigen::VectorXd eta =
      model.E.transpose() * p0w.apply_pinv(model.r0bar);
  for (int k = 0; k <= t_end; ++k) {
    omega += ht_rinv_h;
    eta += model.H.transpose() * rw.apply_pinv(Eigen::VectorXd(y.col(k)));
    const RankDecision d = decide_rank(omega, tol);
    out.information_condition.push_back(condition_number(omega));
    if (d.rank < n) {
      throw LossOfInformation(
          "solve_recursive: fused information matrix singular at step " +
          std::to_string(k));
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(omega);
    out.filtered.col(k) = ldlt.solve(eta);
    if (k < t_end) {
      // Marginalize x_k against the dynamics block.
      const Eigen::MatrixXd big = omega + model.A.transpose() * w_a;
      const Eigen::VectorXd gvec =
          eta - model.A.transpose() * dynw.apply_pinv(
                    Eigen::VectorXd(model.B * u.col(k)));
      Eigen::LDLT<Eigen::MatrixXd> gld(big);
      const Eigen::MatrixXd cross = model.A.transpose() * w_e;  // n x n
      omega = model.E.transpose() * w_e - cross.transpose() * gld.solve(cross);
      eta = model.E.transpose() *
                dynw.apply_pinv(Eigen::VectorXd(model.B * u.col(k))) +
            cross.transpose() * gld.solve(gvec);
    }
  }
  out.final_state = out.filtered.col(t_end);
  return out;
}

double evaluate_objective(const StochasticDescriptorModel& model,
                          const Eigen::MatrixXd& y, const Eigen::MatrixXd& u,
                          const Eigen::MatrixXd& states, double tol) {
  model.check_dimensions();
  check_data_dims(model, y, u);
  if (states.rows() != model.n() || states.cols() != y.cols()) {
    throw std::invalid_argument("evaluate_objective: states must be n x (T+1)");
  }
  const Weights w{CovarianceWeight(model.P0, tol), CovarianceWeight(model.R, tol),
                  CovarianceWeight(model.F * model.F.transpose(), tol)};
  MapEstimate scratch;
  scratch.states = states;
  fill_estimate_terms(model, y, u, w, &scratch);
  return scratch.objective_value;
}

MapEstimate solve_dense_oracle(const StochasticDescriptorModel& model,
                               const Eigen::MatrixXd& y,
                               const Eigen::MatrixXd& u,
                               const ValidationReport* report, double tol) {
  model.check_dimensions();
  check_data_dims(model, y, u);
  ensure_validated(model, report, tol);

  const int t_end = static_cast<int>(y.cols()) - 1;
  const Eigen::Index n = model.n();
  const Eigen::Index nx = n * (t_end + 1);
  if (nx > 200) {
    throw std::invalid_argument(
        "solve_dense_oracle: limited to (T+1)*n <= 200");
  }
  const CovarianceWeight p0w(model.P0, tol);
  const CovarianceWeight rw(model.R, tol);
  const CovarianceWeight dynw(model.F * model.F.transpose(), tol);
  if (!dynw.positive_definite()) {
    throw SingularWeight("solve_dense_oracle: FF^T must be positive definite");
  }

  const Eigen::Index rows = p0w.whitener().rows() +
                            rw.whitener().rows() * (t_end + 1) +
                            dynw.whitener().rows() * t_end;
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(rows, nx);
  Eigen::VectorXd rhs(rows);
  Eigen::Index r = 0;
  big.block(r, 0, p0w.whitener().rows(), n) = p0w.whitener() * model.E;
  rhs.segment(r, p0w.whitener().rows()) = p0w.whitener() * model.r0bar;
  r += p0w.whitener().rows();
  for (int k = 0; k <= t_end; ++k) {
    big.block(r, k * n, rw.whitener().rows(), n) = rw.whitener() * model.H;
    rhs.segment(r, rw.whitener().rows()) = rw.whitener() * y.col(k);
    r += rw.whitener().rows();
  }
  for (int k = 0; k < t_end; ++k) {
    big.block(r, k * n, dynw.whitener().rows(), n) =
        -(dynw.whitener() * model.A);
    big.block(r, (k + 1) * n, dynw.whitener().rows(), n) =
        dynw.whitener() * model.E;
    rhs.segment(r, dynw.whitener().rows()) =
        dynw.whitener() * (model.B * u.col(k));
    r += dynw.whitener().rows();
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(big);
  qr.setThreshold(tol * static_cast<double>(std::max(rows, nx)));
  if (qr.rank() < nx) {
    throw Unestimable(
        "solve_dense_oracle: stacked coefficient matrix is column-rank "
        "deficient");
  }
  const Eigen::VectorXd sol = qr.solve(rhs);

  MapEstimate est;
  est.states.resize(n, t_end + 1);
  for (int k = 0; k <= t_end; ++k) est.states.col(k) = sol.segment(k * n, n);
  est.diagnostics.condition_estimate =
      std::abs(qr.maxPivot()) /
      std::max(std::abs(qr.matrixQR()(nx - 1, nx - 1)), 1e-300);
  const Weights w{p0w, rw, dynw};
  fill_estimate_terms(model, y, u, w, &est);
  return est;
}

}  // namespace descest
