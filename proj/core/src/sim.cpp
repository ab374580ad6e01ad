#include "descest/sim.hpp"

#include <stdexcept>
#include <utility>

#include "descest/errors.hpp"
#include "descest/rng.hpp"

namespace descest {

FreeStateSpec FreeStateSpec::sampled(Eigen::VectorXd mu_u, double q) {
  FreeStateSpec s;
  s.kind = Kind::kSampled;
  s.mu = std::move(mu_u);
  s.q = q;
  return s;
}

FreeStateSpec FreeStateSpec::given_sequence(Eigen::MatrixXd sequence) {
  FreeStateSpec s;
  s.kind = Kind::kGiven;
  s.given = std::move(sequence);
  return s;
}

Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mean,
                                const Eigen::MatrixXd& covariance,
                                std::uint64_t seed) {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
    throw std::invalid_argument("sample_gaussian: covariance shape mismatch");
  }
  const Eigen::MatrixXd factor = psd_sqrt_factor(covariance);
  CounterRng rng(seed);
  return mean + factor * rng.normal_vector(static_cast<int>(mean.size()));
}

Trajectory simulate(const StochasticDescriptorModel& model,
                    const KcfDecomposition& decomp, const Eigen::MatrixXd& u,
                    std::uint64_t seed, const FreeStateSpec& free_spec) {
  model.check_dimensions();
  if (u.rows() != model.n_inputs()) {
    throw std::invalid_argument("simulate: u must have j rows");
  }
  const int t_end = static_cast<int>(u.cols()) - 1;  // horizon T
  if (t_end < 1) {
    throw std::invalid_argument("simulate: need horizon T >= 1");
  }
  if (decomp.structure.has_o_part()) {
    throw ModelRejected(
        "simulate: over-determined blocks constrain the input; the model is "
        "not a well-defined stochastic system");
  }
  const auto [causal, witnesses] = check_causality(model, decomp);
  if (!causal) {
    throw ModelRejected(
        "simulate: non-causal model; states would depend on future inputs "
        "and disturbances");
  }

  const Eigen::Index n = model.n();
  const Eigen::Index m = model.n_outputs();
  const Eigen::Index p = model.n_disturbances();
  const TransformedSystem sys =
      partition_transformed(decomp, model.B, model.F, model.H);
  const auto& s = decomp.structure;
  const std::vector<int> free_cols = s.free_state_columns();
  const auto d_free = static_cast<Eigen::Index>(free_cols.size());

  Trajectory traj;
  traj.horizon = t_end;
  traj.inputs = u;

  // One extra disturbance column feeds the terminal algebraic states; only
  // w_0..w_{T-1} are part of the stored trajectory.
  CounterRng rng_w(seed, 0);
  Eigen::MatrixXd w(p, t_end + 1);
  for (int k = 0; k <= t_end; ++k) {
    w.col(k) = rng_w.normal_vector(static_cast<int>(p));
  }
  CounterRng rng_v(seed, 1);
  const Eigen::MatrixXd r_factor = psd_sqrt_factor(model.R);
  traj.meas_noise.resize(m, t_end + 1);
  for (int k = 0; k <= t_end; ++k) {
    traj.meas_noise.col(k) =
        r_factor * rng_v.normal_vector(static_cast<int>(m));
  }

  CounterRng rng_r0(seed, 2);
  const Eigen::MatrixXd p0_factor = psd_sqrt_factor(model.P0);
  const Eigen::VectorXd r0 =
      model.r0bar +
      p0_factor * rng_r0.normal_vector(static_cast<int>(model.n_eq()));
  const Eigen::VectorXd rho = decomp.P * r0;  // prior on E~ x~_0

  traj.free_states.resize(d_free, t_end + 1);
  if (d_free > 0) {
    if (free_spec.kind == FreeStateSpec::Kind::kGiven) {
      if (free_spec.given.rows() != d_free ||
          free_spec.given.cols() != t_end + 1) {
        throw std::invalid_argument(
            "simulate: given free-state sequence must be d_free x (T+1)");
      }
      traj.free_states = free_spec.given;
    } else {
      Eigen::VectorXd mu = free_spec.mu;
      if (mu.size() == 0) mu = Eigen::VectorXd::Zero(d_free);
      if (mu.size() != d_free) {
        throw std::invalid_argument("simulate: free-state mu has wrong size");
      }
      CounterRng rng_free(seed, 3);
      for (int k = 0; k <= t_end; ++k) {
        traj.free_states.col(k) =
            mu + free_spec.q * rng_free.normal_vector(static_cast<int>(d_free));
      }
    }
  }

  const auto& co = decomp.col_offsets;
  const auto& ro = decomp.row_offsets;
  Eigen::MatrixXd xt = Eigen::MatrixXd::Zero(n, t_end + 1);  // transformed

  // U-group: free states at every k; remaining states from the prior at
  // k = 0 and the shift recursion afterwards.
  {
    Eigen::Index col = co[0];
    Eigen::Index row = ro[0];
    Eigen::Index fs = 0;
    for (int i = 0; i < s.eps0; ++i) {
      xt.row(col) = traj.free_states.row(fs);
      ++col;
      ++fs;
    }
    for (int eps : s.eps) {
      for (int k = 0; k <= t_end; ++k) xt(col, k) = traj.free_states(fs, k);
      // E_U x~_0 = rho over the block rows: states 2..eps+1 at k = 0.
      for (int i = 0; i < eps; ++i) xt(col + 1 + i, 0) = rho(row + i);
      for (int k = 0; k < t_end; ++k) {
        for (int i = 0; i < eps; ++i) {
          xt(col + 1 + i, k + 1) =
              xt(col + i, k) +
              sys.B_U.row(row - ro[0] + i).dot(u.col(k)) +
              sys.F_U.row(row - ro[0] + i).dot(w.col(k));
        }
      }
      col += eps + 1;
      row += eps;
      ++fs;
    }
  }

  // J-group: ordinary state-space recursion from the prior rows.
  {
    const Eigen::Index nj = decomp.col_group_size(1);
    if (nj > 0) {
      xt.block(co[1], 0, nj, 1) = rho.segment(ro[1], nj);
      for (int k = 0; k < t_end; ++k) {
        xt.block(co[1], k + 1, nj, 1) =
            sys.A_J * xt.block(co[1], k, nj, 1) + sys.B_J * u.col(k) +
            sys.F_J * w.col(k);
      }
    }
  }

  // N-group: algebraic solution; causal models keep only the i = 0 term, so
  // the prior rows of this group carry no usable information.
  {
    const Eigen::Index nn = decomp.col_group_size(2);
    if (nn > 0) {
      for (int k = 0; k <= t_end; ++k) {
        xt.block(co[2], k, nn, 1) = -sys.B_N * u.col(k) - sys.F_N * w.col(k);
      }
    }
  }

  traj.states = decomp.Q * xt;
  traj.measurements = model.H * traj.states + traj.meas_noise;
  traj.disturbances = w.leftCols(t_end);
  return traj;
}

}  // namespace descest
