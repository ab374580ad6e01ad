#include "descest/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace descest {

void StochasticDescriptorModel::check_dimensions() const {
  const Eigen::Index meq = E.rows();
  const Eigen::Index nx = E.cols();
  if (meq < 1 || nx < 1) {
    throw std::invalid_argument("model: E must be at least 1x1");
  }
  if (A.rows() != meq || A.cols() != nx) {
    throw std::invalid_argument("model: A must match E's shape");
  }
  if (B.rows() != meq) {
    throw std::invalid_argument("model: B must have n_eq rows");
  }
  if (F.rows() != meq) {
    throw std::invalid_argument("model: F must have n_eq rows");
  }
  if (H.cols() != nx) {
    throw std::invalid_argument("model: H must have n columns");
  }
  if (H.rows() < 1) {
    throw std::invalid_argument("model: H must have at least one row");
  }
  if (R.rows() != H.rows() || R.cols() != H.rows()) {
    throw std::invalid_argument("model: R must be m x m");
  }
  if (r0bar.size() != meq) {
    throw std::invalid_argument("model: r0bar must have n_eq entries");
  }
  if (P0.rows() != meq || P0.cols() != meq) {
    throw std::invalid_argument("model: P0 must be n_eq x n_eq");
  }
}

namespace {

bool symmetric_positive_definite(const Eigen::MatrixXd& w, double tol) {
  if (w.rows() == 0) return true;
  if ((w - w.transpose()).norm() > tol * std::max(1.0, w.norm()) * 1e4) {
    return false;
  }
  const CovarianceWeight cw(0.5 * (w + w.transpose()), tol);
  return cw.positive_definite();
}

}  // namespace

std::pair<bool, std::vector<CausalityWitness>> check_causality(
    const StochasticDescriptorModel& model, const KcfDecomposition& decomp,
    double tol) {
  const TransformedSystem t =
      partition_transformed(decomp, model.B, model.F, model.H);
  const int index = nilpotency_index(decomp);
  std::vector<CausalityWitness> witnesses;
  bool causal = true;
  // Structurally vanishing products come out at the reconstruction-residual
  // level (~cond * eps * scale), far below this threshold; genuine couplings
  // sit orders of magnitude above it.
  const double threshold =
      100.0 * tol * std::max({model.B.norm(), model.F.norm(), 1.0});
  Eigen::MatrixXd power = t.E_N;
  for (int i = 1; i <= index - 1; ++i) {
    CausalityWitness w;
    w.power = i;
    w.norm_B = (power * t.B_N).norm();
    w.norm_F = (power * t.F_N).norm();
    witnesses.push_back(w);
    if (w.norm_B > threshold || w.norm_F > threshold) {
      causal = false;
    }
    power = (power * t.E_N).eval();
  }
  return {causal, witnesses};
}

ValidationReport validate(const StochasticDescriptorModel& model, double tol) {
  model.check_dimensions();
  const KcfDecomposition decomp = compute_kcf(model.pencil(), tol);
  return validate(model, decomp, tol);
}

ValidationReport validate(const StochasticDescriptorModel& model,
                          const KcfDecomposition& decomp, double tol) {
  model.check_dimensions();
  ValidationReport rep;
  const auto& s = decomp.structure;

  Eigen::MatrixXd ea(model.n_eq(), model.n() * 2);
  ea << model.E, model.A;
  rep.row_rank_ok = rank_of(ea, tol) == model.n_eq();

  Eigen::MatrixXd eh(model.n_eq() + model.n_outputs(), model.n());
  eh << model.E, model.H;
  rep.estimable_global = rank_of(eh, tol) == model.n();

  // Per-block estimableness: for each under-determined block, stack the
  // block's canonical E rows over the H columns of the block's states. A
  // zero column of the transformed pencil contributes an empty E part, so
  // only the measurement can cover that state.
  const TransformedSystem t =
      partition_transformed(decomp, model.B, model.F, model.H);
  rep.estimable_u_blocks = true;
  {
    Eigen::Index col = 0;
    Eigen::Index row = 0;
    auto check_block = [&](Eigen::Index nrows, Eigen::Index ncols) {
      Eigen::MatrixXd stacked(nrows + model.n_outputs(), ncols);
      stacked.topRows(nrows) = t.E_U.block(row, col, nrows, ncols);
      stacked.bottomRows(model.n_outputs()) = t.H_U.middleCols(col, ncols);
      if (rank_of(stacked, tol) != ncols) rep.estimable_u_blocks = false;
      row += nrows;
      col += ncols;
    };
    for (int i = 0; i < s.eps0; ++i) check_block(0, 1);
    for (int eps : s.eps) check_block(eps, eps + 1);
  }

  rep.f_full_col_rank =
      model.F.cols() == 0 || rank_of(model.F, tol) == model.F.cols();
  rep.index = nilpotency_index(decomp);
  std::tie(rep.causal, rep.causality_witnesses) =
      check_causality(model, decomp, tol);
  rep.overdetermined_blocks_present = s.has_o_part();
  rep.r_positive_definite = symmetric_positive_definite(model.R, tol);
  rep.p0_positive_definite = symmetric_positive_definite(model.P0, tol);

  if (!rep.row_rank_ok) {
    rep.diagnostics.push_back(
        "[E A] is row-rank deficient: some equations are redundant");
  }
  if (rep.overdetermined_blocks_present) {
    std::ostringstream os;
    os << "over-determined blocks present (eta0=" << s.eta0 << ", eta count="
       << s.eta.size()
       << "): a zero row of the transformed pencil constrains the "
          "deterministic input; model rejected for estimation";
    rep.diagnostics.push_back(os.str());
  }
  if (!rep.estimable_global) {
    rep.diagnostics.push_back(
        "[E; H] is column-rank deficient: some state carries neither "
        "dynamic information nor a measurement");
  }
  if (!rep.estimable_u_blocks) {
    rep.diagnostics.push_back(
        "an under-determined block's free state is not covered by the "
        "measurement map");
  }
  if (!rep.causal) {
    std::ostringstream os;
    os << "non-causal: index " << rep.index
       << " with nonzero E_N^i B_N or E_N^i F_N products";
    rep.diagnostics.push_back(os.str());
  }
  if (!rep.f_full_col_rank) {
    rep.diagnostics.push_back(
        "F is column-rank deficient; apply reduce_f before estimation");
  }
  if (!rep.r_positive_definite) {
    rep.diagnostics.push_back("R is not symmetric positive definite");
  }
  if (!rep.p0_positive_definite) {
    rep.diagnostics.push_back(
        "P0 is semidefinite: handled via its pseudo-inverse in the "
        "objective (null directions carry no prior weight)");
  }
  return rep;
}

std::pair<StochasticDescriptorModel, Eigen::MatrixXd> reduce_f(
    const StochasticDescriptorModel& model, double tol) {
  const Eigen::Index p = model.F.cols();
  if (p == 0) {
    return {model, Eigen::MatrixXd::Zero(0, 0)};
  }
  const RankDecision d = decide_rank(model.F, tol);
  if (d.rank == p) {
    return {model, Eigen::MatrixXd::Identity(p, p)};
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      model.F, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const int r = d.rank;
  Eigen::MatrixXd f_reduced(model.F.rows(), r);
  Eigen::MatrixXd map(r, p);
  for (int i = 0; i < r; ++i) {
    Eigen::VectorXd col = svd.matrixU().col(i) * svd.singularValues()(i);
    Eigen::VectorXd vrow = svd.matrixV().col(i);
    // Sign convention: largest-magnitude entry of each F' column positive.
    Eigen::Index imax;
    col.cwiseAbs().maxCoeff(&imax);
    if (col(imax) < 0.0) {
      col = -col;
      vrow = -vrow;
    }
    f_reduced.col(i) = col;
    map.row(i) = vrow.transpose();
  }
  StochasticDescriptorModel out = model;
  out.F = f_reduced;
  return {out, map};
}

}  // namespace descest
