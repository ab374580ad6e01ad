#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "descest/kcf.hpp"
#include "descest/model.hpp"

namespace descest {

/// How the free (under-determined) states are produced during simulation.
/// The descriptor dynamics leave them entirely unspecified, so the caller
/// either supplies the whole sequence or lets the simulator draw it i.i.d.
/// from N(mu, q^2 I).
struct FreeStateSpec {
  enum class Kind { kSampled, kGiven };
  Kind kind = Kind::kSampled;
  Eigen::MatrixXd given;  // d_free x (T+1), used when kind == kGiven
  Eigen::VectorXd mu;     // d_free; empty means zero
  double q = 1.0;

  static FreeStateSpec sampled(Eigen::VectorXd mu_u = {}, double q = 1.0);
  static FreeStateSpec given_sequence(Eigen::MatrixXd sequence);
};

struct Trajectory {
  int horizon = 0;                 // T
  Eigen::MatrixXd states;          // n x (T+1)
  Eigen::MatrixXd measurements;    // m x (T+1)
  Eigen::MatrixXd inputs;          // j x (T+1)
  Eigen::MatrixXd disturbances;    // p x T
  Eigen::MatrixXd meas_noise;      // m x (T+1)
  Eigen::MatrixXd free_states;     // d_free x (T+1); 0 rows without U-blocks
};

/// Draw from N(mean, covariance) through a symmetric factorization of the
/// covariance; deterministic under a fixed seed. A zero covariance returns
/// the mean exactly. Throws std::invalid_argument for non-PSD covariance.
Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mean,
                                const Eigen::MatrixXd& covariance,
                                std::uint64_t seed);

/// Simulates a consistent trajectory of a validated causal model through the
/// canonical subsystem recursions: the J-group as an ordinary state space,
/// the N-group through its algebraic solution (only the i = 0 term
/// contributes for causal models), the U-group with its free state supplied
/// or sampled. The initial condition is drawn from the prior on E x_0 and
/// completed per group; the terminal algebraic states use one extra internal
/// disturbance draw beyond the stored sequence.
///
/// u must be j x (T+1) with T >= 1. Rejects models with over-determined
/// blocks or a non-causal algebraic part (ModelRejected).
Trajectory simulate(const StochasticDescriptorModel& model,
                    const KcfDecomposition& decomp, const Eigen::MatrixXd& u,
                    std::uint64_t seed,
                    const FreeStateSpec& free_spec = FreeStateSpec::sampled());

}  // namespace descest
