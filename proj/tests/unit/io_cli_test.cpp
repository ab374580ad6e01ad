#include "descest/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "corpus.hpp"
#include "descest/estimator.hpp"
#include "descest/sim.hpp"
#include "schema_lite.hpp"

using namespace descest;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path test_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("descest_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  json report;
};

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = test_dir() / ("stdout_" + std::to_string(counter++));
  const std::string cmd =
      std::string(DESCEST_CLI_PATH) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WEXITSTATUS(status);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  if (!r.out.empty()) {
    r.report = json::parse(r.out, nullptr, /*allow_exceptions=*/false);
  }
  return r;
}

std::string write_model(const std::string& name,
                        const StochasticDescriptorModel& m) {
  io::ModelFile mf;
  mf.model = m;
  mf.name = name;
  const fs::path path = test_dir() / (name + ".json");
  io::save_model(path.string(), mf);
  return path.string();
}

json load_schema(const char* name) {
  const fs::path path =
      fs::path(DESCEST_SOURCE_DIR) / "docs" / "schemas" / name;
  std::ifstream in(path);
  REQUIRE(in.good());
  return json::parse(in);
}

void check_report_schema(const json& report) {
  static const json schema = load_schema("run_report.schema.json");
  const auto errors = schema_lite::validate(schema, report);
  for (const auto& e : errors) {
    CAPTURE(e);
    CHECK(false);
  }
  CHECK(errors.empty());
}

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

StochasticDescriptorModel nilpotent2_model() {
  StochasticDescriptorModel m;
  m.E = mat({{0, 1}, {0, 0}});
  m.A = Eigen::MatrixXd::Identity(2, 2);
  m.B = mat({{1}, {0}});
  m.F = Eigen::MatrixXd::Identity(2, 2);
  m.H = Eigen::MatrixXd::Identity(2, 2);
  m.R = Eigen::MatrixXd::Identity(2, 2);
  m.P0 = Eigen::MatrixXd::Identity(2, 2);
  m.r0bar = Eigen::VectorXd::Zero(2);
  return m;
}

}  // namespace

TEST_CASE("model file round trip is lossless at full precision") {
  corpus::ModelOptions mo;
  mo.with_u_block = true;
  const StochasticDescriptorModel m = corpus::random_model(70, mo);
  const std::string path = write_model("roundtrip", m);
  const io::ModelFile back = io::load_model(path);
  CHECK(back.model.E == m.E);
  CHECK(back.model.A == m.A);
  CHECK(back.model.B == m.B);
  CHECK(back.model.F == m.F);
  CHECK(back.model.H == m.H);
  CHECK(back.model.R == m.R);
  CHECK(back.model.P0 == m.P0);
  CHECK(back.model.r0bar == m.r0bar);
  CHECK(back.name == "roundtrip");
}

TEST_CASE("model parse errors carry a located message") {
  const fs::path path = test_dir() / "broken.json";
  SUBCASE("ragged matrix row") {
    std::ofstream(path) << R"({"E": [[1, 0], [0]], "A": [[1,0],[0,1]],
      "B": [[0],[0]], "F": [[1,0],[0,1]], "H": [[1,0]], "R": [[1]],
      "P0": [[1,0],[0,1]], "r0bar": [0,0]})";
    try {
      io::load_model(path.string());
      CHECK(false);
    } catch (const io::ParseError& e) {
      CHECK(std::string(e.what()).find("/E/1") != std::string::npos);
    }
  }
  SUBCASE("missing field") {
    std::ofstream(path) << R"({"E": [[1]]})";
    CHECK_THROWS_WITH_AS(io::load_model(path.string()),
                         doctest::Contains("missing required field 'A'"),
                         io::ParseError);
  }
  SUBCASE("syntax error") {
    std::ofstream(path) << "{not json";
    CHECK_THROWS_AS(io::load_model(path.string()), io::ParseError);
  }
}

TEST_CASE("sequence csv round trip") {
  CounterRng rng(8);
  Eigen::MatrixXd values(3, 7);
  for (int k = 0; k < 7; ++k) values.col(k) = rng.normal_vector(3);
  const fs::path path = test_dir() / "seq.csv";
  io::save_sequence_csv(path.string(), "y", values);
  const Eigen::MatrixXd back = io::load_sequence_csv(path.string());
  CHECK(back == values);
}

TEST_CASE("trajectory json serialization is lossless") {
  corpus::ModelOptions mo;
  mo.with_u_block = true;
  const StochasticDescriptorModel m = corpus::random_model(77, mo);
  const KcfDecomposition d = compute_kcf(m.pencil());
  const Trajectory traj =
      simulate(m, d, corpus::random_inputs(1, 6, 1), 12);
  const json doc = json::parse(io::trajectory_to_json(traj, 12));
  auto to_mat = [](const json& rows) {
    Eigen::MatrixXd out(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < rows[i].size(); ++j) {
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            rows[i][j].get<double>();
      }
    }
    return out;
  };
  CHECK(to_mat(doc["states"]) == traj.states);
  CHECK(to_mat(doc["measurements"]) == traj.measurements);
  CHECK(to_mat(doc["disturbances"]) == traj.disturbances);
  CHECK(to_mat(doc["free_states"]) == traj.free_states);
  CHECK(doc["horizon"].get<int>() == traj.horizon);
}

TEST_CASE("file digest is stable and content sensitive") {
  const fs::path path = test_dir() / "digest.txt";
  std::ofstream(path) << "abc";
  const std::string d1 = io::file_digest_hex(path.string());
  CHECK(d1 == io::file_digest_hex(path.string()));
  std::ofstream(path) << "abd";
  CHECK(d1 != io::file_digest_hex(path.string()));
}

TEST_CASE("cli analyze") {
  SUBCASE("nilpotent model reports index 2") {
    const std::string path = write_model("n2", nilpotent2_model());
    const CliResult r = run_cli("analyze " + path);
    CHECK(r.exit_code == 0);
    check_report_schema(r.report);
    CHECK(r.report["structure"]["nilpotent"] == json::array({2}));
    CHECK(r.report["structure"]["index"] == 2);
  }
  SUBCASE("diagonal pencil reports its eigenvalues") {
    StochasticDescriptorModel m = nilpotent2_model();
    m.E = Eigen::MatrixXd::Identity(2, 2);
    m.A = mat({{2, 0}, {0, 3}});
    const std::string path = write_model("diag23", m);
    const CliResult r = run_cli("analyze " + path);
    CHECK(r.exit_code == 0);
    check_report_schema(r.report);
    const auto& eigs = r.report["structure"]["finite_eigenvalues"];
    REQUIRE(eigs.size() == 2);
    CHECK(eigs[0]["re"].get<double>() == doctest::Approx(2.0));
    CHECK(eigs[1]["re"].get<double>() == doctest::Approx(3.0));
    CHECK(r.report["regular"] == true);
  }
  SUBCASE("o-block pencil flags over-determined rows") {
    StochasticDescriptorModel m;
    const MatrixPencil o = make_o_block(1);
    m.E = o.E;
    m.A = o.A;
    m.B = Eigen::MatrixXd::Zero(2, 1);
    m.F = Eigen::MatrixXd::Identity(2, 2);
    m.H = mat({{1}});
    m.R = mat({{1}});
    m.P0 = Eigen::MatrixXd::Identity(2, 2);
    m.r0bar = Eigen::VectorXd::Zero(2);
    const std::string path = write_model("oblock", m);
    const CliResult r = run_cli("analyze " + path);
    CHECK(r.exit_code == 0);
    CHECK(r.report["overdetermined_rows_flagged"] == true);
    CHECK(r.report["structure"]["eta"] == json::array({1}));
  }
  SUBCASE("missing file exits 1 with a parse error object") {
    const CliResult r = run_cli("analyze /nonexistent/model.json");
    CHECK(r.exit_code == 1);
    check_report_schema(r.report);
    CHECK(r.report["error"]["code"] == "parse");
  }
  SUBCASE("ESTIMATOR_TOL overrides the default tolerance") {
    const std::string path = write_model("envtol", nilpotent2_model());
    static int counter = 9000;
    const fs::path out = test_dir() / ("stdout_" + std::to_string(counter++));
    const std::string cmd = "ESTIMATOR_TOL=1e-6 " +
                            std::string(DESCEST_CLI_PATH) + " analyze " +
                            path + " > " + out.string();
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::ifstream in(out);
    const json rep = json::parse(in);
    CHECK(rep["tol"].get<double>() == doctest::Approx(1e-6));
  }
  SUBCASE("ambiguous rank decision exits 2") {
    StochasticDescriptorModel m = nilpotent2_model();
    m.E = mat({{1, 0}, {0, 2e-10}});
    m.A = Eigen::MatrixXd::Identity(2, 2);
    const std::string path = write_model("ambiguous", m);
    const CliResult r = run_cli("analyze " + path);
    CHECK(r.exit_code == 2);
    CHECK(r.report["error"]["code"] == "numerical");
  }
}

TEST_CASE("cli validate") {
  SUBCASE("passing model exits 0 with all booleans set") {
    corpus::ModelOptions mo;
    const StochasticDescriptorModel m = corpus::random_model(71, mo);
    const std::string path = write_model("valid", m);
    const CliResult r = run_cli("validate " + path);
    CHECK(r.exit_code == 0);
    check_report_schema(r.report);
    CHECK(r.report["validation"]["accepted_for_estimation"] == true);
    CHECK(r.report["validation"]["row_rank_ok"] == true);
    CHECK(r.report["validation"]["estimable_u_blocks"] == true);
    CHECK(r.report["validation"]["causal"] == true);
  }
  SUBCASE("o-block model exits 3 and quotes the rejected rows") {
    StochasticDescriptorModel m;
    const MatrixPencil o = make_o_block(1);
    m.E = o.E;
    m.A = o.A;
    m.B = Eigen::MatrixXd::Zero(2, 1);
    m.F = Eigen::MatrixXd::Identity(2, 2);
    m.H = mat({{1}});
    m.R = mat({{1}});
    m.P0 = Eigen::MatrixXd::Identity(2, 2);
    m.r0bar = Eigen::VectorXd::Zero(2);
    const std::string path = write_model("oblock_v", m);
    const CliResult r = run_cli("validate " + path);
    CHECK(r.exit_code == 3);
    check_report_schema(r.report);
    bool mentions = false;
    for (const auto& d : r.report["validation"]["diagnostics"]) {
      if (d.get<std::string>().find("zero row") != std::string::npos) {
        mentions = true;
      }
    }
    CHECK(mentions);
  }
  SUBCASE("non-causal index-2 model exits 3 and lists witnesses") {
    StochasticDescriptorModel m = nilpotent2_model();
    m.B = mat({{0}, {1}});  // couples into the chain
    const std::string path = write_model("noncausal", m);
    const CliResult r = run_cli("validate " + path);
    CHECK(r.exit_code == 3);
    CHECK(r.report["validation"]["causal"] == false);
    REQUIRE(r.report["validation"]["causality_witnesses"].size() == 1);
    CHECK(r.report["validation"]["causality_witnesses"][0]["power"] == 1);
  }
}

TEST_CASE("cli simulate") {
  corpus::ModelOptions mo;
  const StochasticDescriptorModel m = corpus::random_model(72, mo);
  const std::string path = write_model("simmodel", m);
  const std::string prefix = (test_dir() / "traj").string();

  SUBCASE("fixed seed gives byte-identical csv across runs") {
    const CliResult r1 =
        run_cli("simulate " + path + " --horizon 20 --seed 9 --out " + prefix);
    REQUIRE(r1.exit_code == 0);
    std::ifstream f1(prefix + ".csv");
    std::stringstream s1;
    s1 << f1.rdbuf();
    const CliResult r2 =
        run_cli("simulate " + path + " --horizon 20 --seed 9 --out " + prefix);
    REQUIRE(r2.exit_code == 0);
    std::ifstream f2(prefix + ".csv");
    std::stringstream s2;
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());
    CHECK(!s1.str().empty());
  }
  SUBCASE("horizon 100 writes 101 state rows") {
    const CliResult r = run_cli("simulate " + path +
                                " --horizon 100 --seed 3 --out " + prefix);
    REQUIRE(r.exit_code == 0);
    std::ifstream f(prefix + ".csv");
    int lines = 0;
    std::string line;
    while (std::getline(f, line)) ++lines;
    CHECK(lines == 102);  // header + 101 steps
    CHECK(r.report["horizon"] == 100);
  }
  SUBCASE("residuals recomputed from the written files stay tiny") {
    const CliResult r = run_cli("simulate " + path +
                                " --horizon 15 --seed 4 --out " + prefix);
    REQUIRE(r.exit_code == 0);
    check_report_schema(r.report);
    CHECK(r.report["max_dynamics_residual"].get<double>() <= 1e-10);
    std::ifstream jf(prefix + ".json");
    const json traj = json::parse(jf);
    // Recompute E x_{k+1} - A x_k - B u_k - F w_k from the serialized data.
    auto to_mat = [](const json& rows) {
      Eigen::MatrixXd out(rows.size(), rows.empty() ? 0 : rows[0].size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
          out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              rows[i][j].get<double>();
        }
      }
      return out;
    };
    const Eigen::MatrixXd x = to_mat(traj["states"]);
    const Eigen::MatrixXd u = to_mat(traj["inputs"]);
    const Eigen::MatrixXd w = to_mat(traj["disturbances"]);
    for (int k = 0; k < traj["horizon"].get<int>(); ++k) {
      const Eigen::VectorXd res = m.E * x.col(k + 1) - m.A * x.col(k) -
                                  m.B * u.col(k) - m.F * w.col(k);
      CHECK(res.norm() <= 1e-10);
    }
  }
}

TEST_CASE("cli estimate") {
  corpus::ModelOptions mo;
  const StochasticDescriptorModel m = corpus::random_model(73, mo);
  const std::string path = write_model("estmodel", m);
  const KcfDecomposition d = compute_kcf(m.pencil());
  const Eigen::MatrixXd u = corpus::random_inputs(1, 12, 5);
  const Trajectory traj = simulate(m, d, u, 31);
  const std::string y_path = (test_dir() / "y.csv").string();
  const std::string u_path = (test_dir() / "u.csv").string();
  io::save_sequence_csv(y_path, "y", traj.measurements);
  io::save_sequence_csv(u_path, "u", u);

  auto estimate_states = [&](const std::string& method) {
    const std::string prefix = (test_dir() / ("est_" + method)).string();
    const CliResult r =
        run_cli("estimate " + path + " --y " + y_path + " --u " + u_path +
                " --method " + method + " --out " + prefix);
    REQUIRE(r.exit_code == 0);
    check_report_schema(r.report);
    return io::load_sequence_csv(prefix + ".csv");
  };

  SUBCASE("batch and recursive agree on the final state row") {
    const Eigen::MatrixXd batch = estimate_states("batch");
    const Eigen::MatrixXd rec = estimate_states("recursive");
    // CSV columns: xhat components then residual norms; compare the states.
    const Eigen::Index n = m.n();
    CHECK((batch.col(12).head(n) - rec.col(12).head(n)).norm() <= 1e-8);
  }
  SUBCASE("ml equals batch everywhere") {
    const Eigen::MatrixXd batch = estimate_states("batch");
    const Eigen::MatrixXd ml = estimate_states("ml");
    const Eigen::Index n = m.n();
    // Rows: states, then the residual-norm columns (terminal dyn cell is nan).
    CHECK((batch.topRows(n + 1) - ml.topRows(n + 1)).norm() <=
          1e-9 * (1.0 + batch.topRows(n).norm()));
  }
  SUBCASE("transformed and constrained run end to end") {
    const Eigen::MatrixXd batch = estimate_states("batch");
    const Eigen::MatrixXd tr = estimate_states("transformed");
    const Eigen::Index n = m.n();
    CHECK((batch.topRows(n) - tr.topRows(n)).norm() <=
          1e-4 * (1.0 + batch.topRows(n).norm()));
    estimate_states("constrained");
  }
  SUBCASE("missing y file exits 1 with a parse error object") {
    const CliResult r = run_cli("estimate " + path +
                                " --y /nonexistent/y.csv --out " +
                                (test_dir() / "estx").string());
    CHECK(r.exit_code == 1);
    check_report_schema(r.report);
    CHECK(r.report["error"]["code"] == "parse");
  }
}
