// Command-line front end: pencil analysis, model validation, trajectory
// simulation and MAP estimation over JSON/CSV files.
//
// Exit codes: 0 success, 1 I/O or parse error, 2 numerical failure,
// 3 model rejected by well-posedness checks.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "descest/errors.hpp"
#include "descest/estimator.hpp"
#include "descest/io.hpp"
#include "descest/kcf.hpp"
#include "descest/model.hpp"
#include "descest/pencil.hpp"
#include "descest/sim.hpp"

namespace {

using nlohmann::json;

constexpr const char* kSchemaVersion = "1";

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitModelRejected = 3;

double default_tolerance() {
  if (const char* env = std::getenv("ESTIMATOR_TOL")) {
    try {
      const double v = std::stod(env);
      if (v > 0.0) return v;
    } catch (const std::exception&) {
      // fall through to the built-in default
    }
  }
  return descest::kDefaultRankTol;
}

json finite_or_null(double v) {
  // Reports must not carry non-finite numbers.
  return std::isfinite(v) ? json(v) : json(nullptr);
}

json structure_to_json(const descest::KcfDecomposition& d) {
  const auto& s = d.structure;
  json out;
  out["eps0"] = s.eps0;
  out["eps"] = s.eps;
  json jordan = json::array();
  json eigenvalues = json::array();
  for (const auto& b : s.jordan) {
    jordan.push_back({{"size", b.size},
                      {"re", b.eig.re},
                      {"im", b.eig.im},
                      {"complex_pair", b.eig.is_complex_pair()}});
    for (int c = 0; c < b.size; ++c) {
      eigenvalues.push_back({{"re", b.eig.re}, {"im", b.eig.im}});
      if (b.eig.is_complex_pair()) {
        eigenvalues.push_back({{"re", b.eig.re}, {"im", -b.eig.im}});
      }
    }
  }
  out["jordan"] = jordan;
  out["finite_eigenvalues"] = eigenvalues;
  out["nilpotent"] = s.nilpotent;
  out["eta"] = s.eta;
  out["eta0"] = s.eta0;
  out["index"] = s.nilpotent.empty()
                     ? 0
                     : *std::max_element(s.nilpotent.begin(), s.nilpotent.end());
  out["reconstruction_residual"] = finite_or_null(d.reconstruction_residual);
  out["cond_P"] = finite_or_null(d.cond_P);
  out["cond_Q"] = finite_or_null(d.cond_Q);
  return out;
}

json validation_to_json(const descest::ValidationReport& rep) {
  json out;
  out["row_rank_ok"] = rep.row_rank_ok;
  out["estimable_global"] = rep.estimable_global;
  out["estimable_u_blocks"] = rep.estimable_u_blocks;
  out["f_full_col_rank"] = rep.f_full_col_rank;
  out["index"] = rep.index;
  out["causal"] = rep.causal;
  out["overdetermined_blocks_present"] = rep.overdetermined_blocks_present;
  out["r_positive_definite"] = rep.r_positive_definite;
  out["p0_positive_definite"] = rep.p0_positive_definite;
  out["accepted_for_estimation"] = rep.accepted_for_estimation();
  json witnesses = json::array();
  for (const auto& w : rep.causality_witnesses) {
    witnesses.push_back({{"power", w.power},
                         {"norm_E_N_pow_B_N", finite_or_null(w.norm_B)},
                         {"norm_E_N_pow_F_N", finite_or_null(w.norm_F)}});
  }
  out["causality_witnesses"] = witnesses;
  out["diagnostics"] = rep.diagnostics;
  return out;
}

struct ReportClock {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
  }
};

void emit(const json& report, const std::string& out_path) {
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    descest::io::atomic_write(out_path, text);
  }
}

int run_guarded(const std::string& command, const std::string& out_path,
                const std::function<int(json&)>& body) {
  json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = command;
  ReportClock clock;
  int code = kExitOk;
  try {
    code = body(report);
  } catch (const descest::io::ParseError& e) {
    report["error"] = {{"code", "parse"}, {"message", e.what()}};
    code = kExitIo;
  } catch (const descest::ModelRejected& e) {
    report["error"] = {{"code", "model-rejected"}, {"message", e.what()}};
    code = kExitModelRejected;
  } catch (const descest::SingularWeight& e) {
    report["error"] = {{"code", "model-rejected"}, {"message", e.what()}};
    code = kExitModelRejected;
  } catch (const descest::IllConditioned& e) {
    report["error"] = {{"code", "numerical"}, {"message", e.what()}};
    code = kExitNumerical;
  } catch (const descest::Unestimable& e) {
    report["error"] = {{"code", "numerical"}, {"message", e.what()}};
    code = kExitNumerical;
  } catch (const descest::Infeasible& e) {
    report["error"] = {{"code", "numerical"}, {"message", e.what()}};
    code = kExitNumerical;
  } catch (const descest::LossOfInformation& e) {
    report["error"] = {{"code", "numerical"}, {"message", e.what()}};
    code = kExitNumerical;
  } catch (const std::invalid_argument& e) {
    report["error"] = {{"code", "parse"}, {"message", e.what()}};
    code = kExitIo;
  } catch (const std::exception& e) {
    report["error"] = {{"code", "internal"}, {"message", e.what()}};
    code = kExitNumerical;
  }
  report["timing_ms"] = clock.elapsed_ms();
  try {
    emit(report, out_path);
  } catch (const std::exception& e) {
    std::cerr << "failed to write report: " << e.what() << "\n";
    return kExitIo;
  }
  return code;
}

Eigen::MatrixXd load_or_zero(const std::string& spec, Eigen::Index rows,
                             int horizon, const char* what) {
  if (spec.empty() || spec == "zero") {
    return Eigen::MatrixXd::Zero(rows, horizon + 1);
  }
  const Eigen::MatrixXd m = descest::io::load_sequence_csv(spec);
  if (m.rows() != rows) {
    throw descest::io::ParseError(std::string(spec) + ": " + what + " has " +
                                  std::to_string(m.rows()) +
                                  " components per step, expected " +
                                  std::to_string(rows));
  }
  if (horizon >= 0 && m.cols() != horizon + 1) {
    throw descest::io::ParseError(
        std::string(spec) + ": " + what + " covers " +
        std::to_string(m.cols() - 1) + " steps, expected horizon " +
        std::to_string(horizon));
  }
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"State estimation toolkit for linear stochastic descriptor "
               "systems (dynamics E x_{k+1} = A x_k + B u_k + F w_k)"};
  app.require_subcommand(1);

  std::string model_path;
  std::string out_path;
  double tol = default_tolerance();

  auto* analyze = app.add_subcommand(
      "analyze", "Kronecker structure, index and eigenvalues of the pencil");
  analyze->add_option("model", model_path, "model JSON file")->required();
  analyze->add_option("--tol", tol, "rank decision tolerance");
  analyze->add_option("--out", out_path, "write the report here instead of stdout");

  auto* validate_cmd = app.add_subcommand(
      "validate", "well-posedness, estimableness and causality checks");
  validate_cmd->add_option("model", model_path, "model JSON file")->required();
  validate_cmd->add_option("--tol", tol, "rank decision tolerance");
  validate_cmd->add_option("--out", out_path, "write the report here instead of stdout");

  int horizon = -1;
  std::uint64_t seed = 0;
  std::string input_spec = "zero";
  std::string prefix;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "draw a consistent stochastic trajectory");
  simulate_cmd->add_option("model", model_path, "model JSON file")->required();
  simulate_cmd->add_option("--horizon", horizon, "number of steps T");
  simulate_cmd->add_option("--seed", seed, "random seed")->required();
  simulate_cmd->add_option("--input", input_spec,
                           "input CSV (k,u_0,...) or 'zero'");
  simulate_cmd->add_option("--out", prefix, "output prefix for .csv/.json")
      ->required();
  simulate_cmd->add_option("--tol", tol, "rank decision tolerance");

  std::string y_path;
  std::string u_spec = "zero";
  std::string method = "batch";
  double q_value = 1e8;
  auto* estimate_cmd =
      app.add_subcommand("estimate", "MAP state estimate from measurements");
  estimate_cmd->add_option("model", model_path, "model JSON file")->required();
  estimate_cmd->add_option("--y", y_path, "measurement CSV (k,y_0,...)")
      ->required();
  estimate_cmd->add_option("--u", u_spec, "input CSV or 'zero'");
  estimate_cmd
      ->add_option("--method", method,
                   "batch | recursive | ml | constrained | transformed")
      ->check(CLI::IsMember(
          {"batch", "recursive", "ml", "constrained", "transformed"}));
  estimate_cmd->add_option("--q", q_value,
                           "free-state prior std for --method transformed");
  estimate_cmd->add_option("--out", prefix, "output prefix for .csv")
      ->required();
  estimate_cmd->add_option("--tol", tol, "rank decision tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n";
    return kExitIo;
  }

  if (analyze->parsed()) {
    return run_guarded("analyze", out_path, [&](json& report) {
      const descest::io::ModelFile mf = descest::io::load_model(model_path);
      report["inputs"] = {{"model", model_path},
                          {"model_digest", descest::io::file_digest_hex(model_path)}};
      report["tol"] = tol;
      const descest::KcfDecomposition d =
          descest::compute_kcf(mf.model.pencil(), tol);
      report["structure"] = structure_to_json(d);
      report["regular"] = descest::is_regular(mf.model.pencil(), tol);
      report["overdetermined_rows_flagged"] = d.structure.has_o_part();
      return kExitOk;
    });
  }

  if (validate_cmd->parsed()) {
    return run_guarded("validate", out_path, [&](json& report) {
      const descest::io::ModelFile mf = descest::io::load_model(model_path);
      report["inputs"] = {{"model", model_path},
                          {"model_digest", descest::io::file_digest_hex(model_path)}};
      report["tol"] = tol;
      const descest::KcfDecomposition d =
          descest::compute_kcf(mf.model.pencil(), tol);
      const descest::ValidationReport rep =
          descest::validate(mf.model, d, tol);
      report["structure"] = structure_to_json(d);
      report["validation"] = validation_to_json(rep);
      return rep.accepted_for_estimation() ? kExitOk : kExitModelRejected;
    });
  }

  if (simulate_cmd->parsed()) {
    return run_guarded("simulate", out_path, [&](json& report) {
      const descest::io::ModelFile mf = descest::io::load_model(model_path);
      report["inputs"] = {{"model", model_path},
                          {"model_digest", descest::io::file_digest_hex(model_path)},
                          {"seed", seed}};
      report["tol"] = tol;
      Eigen::MatrixXd u;
      if (input_spec != "zero" && horizon < 0) {
        u = load_or_zero(input_spec, mf.model.n_inputs(), -1, "input");
        horizon = static_cast<int>(u.cols()) - 1;
      } else {
        if (horizon < 1) {
          throw descest::io::ParseError(
              "simulate: --horizon must be >= 1 (or provide --input)");
        }
        u = load_or_zero(input_spec, mf.model.n_inputs(), horizon, "input");
      }
      const descest::KcfDecomposition d =
          descest::compute_kcf(mf.model.pencil(), tol);
      const descest::Trajectory traj = descest::simulate(mf.model, d, u, seed);

      const std::string csv_path = prefix + ".csv";
      const std::string json_path = prefix + ".json";
      descest::io::atomic_write(csv_path,
                                descest::io::trajectory_to_csv(traj));
      descest::io::atomic_write(json_path,
                                descest::io::trajectory_to_json(traj, seed));
      double worst = 0.0;
      for (int k = 0; k < traj.horizon; ++k) {
        const Eigen::VectorXd r = mf.model.E * traj.states.col(k + 1) -
                                  mf.model.A * traj.states.col(k) -
                                  mf.model.B * traj.inputs.col(k) -
                                  mf.model.F * traj.disturbances.col(k);
        worst = std::max(worst, r.norm());
      }
      report["outputs"] = {{"csv", csv_path}, {"json", json_path}};
      report["horizon"] = traj.horizon;
      report["max_dynamics_residual"] = finite_or_null(worst);
      return kExitOk;
    });
  }

  // estimate
  return run_guarded("estimate", out_path, [&](json& report) {
    const descest::io::ModelFile mf = descest::io::load_model(model_path);
    report["tol"] = tol;
    report["method"] = method;
    const Eigen::MatrixXd y = load_or_zero(y_path, mf.model.n_outputs(), -1, "y");
    const int t_end = static_cast<int>(y.cols()) - 1;
    const Eigen::MatrixXd u =
        load_or_zero(u_spec, mf.model.n_inputs(), t_end, "u");
    report["inputs"] = {{"model", model_path},
                        {"model_digest", descest::io::file_digest_hex(model_path)},
                        {"y", y_path},
                        {"y_digest", descest::io::file_digest_hex(y_path)}};
    if (u_spec != "zero") {
      report["inputs"]["u"] = u_spec;
      report["inputs"]["u_digest"] = descest::io::file_digest_hex(u_spec);
    }

    const descest::KcfDecomposition d =
        descest::compute_kcf(mf.model.pencil(), tol);
    const descest::ValidationReport rep = descest::validate(mf.model, d, tol);
    report["validation"] = validation_to_json(rep);

    descest::MapEstimate est;
    if (method == "batch") {
      est = descest::solve_map_batch(mf.model, y, u, &rep, tol);
    } else if (method == "ml") {
      est = descest::solve_ml(mf.model, y, u, &rep, tol);
    } else if (method == "constrained") {
      est = descest::solve_map_constrained(mf.model, y, u, &rep, tol);
    } else if (method == "transformed") {
      est = descest::solve_map_transformed(mf.model, d, y, u, q_value, {}, tol);
    } else {  // recursive
      const descest::RecursiveEstimate rec =
          descest::solve_recursive(mf.model, y, u, &rep, tol);
      est.states = rec.filtered;
      est.objective_value =
          descest::evaluate_objective(mf.model, y, u, rec.filtered, tol);
      // Gradient optimality applies to the final state only; the filtered
      // sequence is not the smoothed optimum.
      est.diagnostics.gradient_norm = std::nan("");
      est.diagnostics.gradient_reference = std::nan("");
      est.diagnostics.condition_estimate = std::nan("");
      est.prior_residual = mf.model.E * rec.filtered.col(0) - mf.model.r0bar;
      est.measurement_residuals = y - mf.model.H * rec.filtered;
      est.dynamics_residuals.resize(mf.model.n_eq(), t_end);
      for (int k = 0; k < t_end; ++k) {
        est.dynamics_residuals.col(k) =
            mf.model.E * rec.filtered.col(k + 1) -
            mf.model.A * rec.filtered.col(k) - mf.model.B * u.col(k);
      }
    }

    const std::string csv_path = prefix + ".csv";
    descest::io::atomic_write(csv_path,
                              descest::io::estimate_to_csv(est));
    report["outputs"] = {{"csv", csv_path}};
    report["horizon"] = t_end;
    report["estimate"] = {
        {"objective_value", finite_or_null(est.objective_value)},
        {"gradient_norm", finite_or_null(est.diagnostics.gradient_norm)},
        {"gradient_reference", finite_or_null(est.diagnostics.gradient_reference)},
        {"condition_estimate", finite_or_null(est.diagnostics.condition_estimate)},
        {"prior_residual_norm", finite_or_null(est.prior_residual.norm())},
        {"max_measurement_residual_norm",
         finite_or_null(est.measurement_residuals.colwise().norm().maxCoeff())},
        {"max_dynamics_residual_norm",
         finite_or_null(t_end > 0
                    ? est.dynamics_residuals.colwise().norm().maxCoeff()
                    : 0.0)}};
    return kExitOk;
  });
}
