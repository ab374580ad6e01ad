#include "descest/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace descest::io {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& field,
                                 Eigen::Index expect_rows = -1,
                                 Eigen::Index expect_cols = -1) {
  if (!j.is_array()) {
    throw ParseError("/" + field + ": expected an array of rows");
  }
  const auto nrows = static_cast<Eigen::Index>(j.size());
  Eigen::Index ncols = -1;
  for (Eigen::Index i = 0; i < nrows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) {
      throw ParseError("/" + field + "/" + std::to_string(i) +
                       ": expected a row array");
    }
    if (ncols < 0) {
      ncols = static_cast<Eigen::Index>(row.size());
    } else if (static_cast<Eigen::Index>(row.size()) != ncols) {
      throw ParseError("/" + field + "/" + std::to_string(i) + ": expected " +
                       std::to_string(ncols) + " entries, got " +
                       std::to_string(row.size()));
    }
  }
  if (ncols < 0) ncols = 0;
  if (expect_rows >= 0 && nrows != expect_rows) {
    throw ParseError("/" + field + ": expected " + std::to_string(expect_rows) +
                     " rows, got " + std::to_string(nrows));
  }
  if (expect_cols >= 0 && ncols != expect_cols) {
    throw ParseError("/" + field + ": expected " + std::to_string(expect_cols) +
                     " columns, got " + std::to_string(ncols));
  }
  Eigen::MatrixXd m(nrows, ncols);
  for (Eigen::Index i = 0; i < nrows; ++i) {
    for (Eigen::Index c = 0; c < ncols; ++c) {
      const json& v = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
      if (!v.is_number()) {
        throw ParseError("/" + field + "/" + std::to_string(i) + "/" +
                         std::to_string(c) + ": expected a number");
      }
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

}  // namespace

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(path + ": expected a JSON object");

  for (const char* field : {"E", "A", "B", "F", "H", "R", "P0", "r0bar"}) {
    if (!doc.contains(field)) {
      throw ParseError(path + ": missing required field '" +
                       std::string(field) + "'");
    }
  }
  ModelFile mf;
  try {
    mf.model.E = matrix_from_json(doc["E"], "E");
    const Eigen::Index neq = mf.model.E.rows();
    const Eigen::Index n = mf.model.E.cols();
    mf.model.A = matrix_from_json(doc["A"], "A", neq, n);
    mf.model.B = matrix_from_json(doc["B"], "B", neq);
    mf.model.F = matrix_from_json(doc["F"], "F", neq);
    mf.model.H = matrix_from_json(doc["H"], "H", -1, n);
    const Eigen::Index m = mf.model.H.rows();
    mf.model.R = matrix_from_json(doc["R"], "R", m, m);
    mf.model.P0 = matrix_from_json(doc["P0"], "P0", neq, neq);
    const json& r0 = doc["r0bar"];
    if (!r0.is_array() || static_cast<Eigen::Index>(r0.size()) != neq) {
      throw ParseError("/r0bar: expected " + std::to_string(neq) + " entries");
    }
    mf.model.r0bar.resize(neq);
    for (Eigen::Index i = 0; i < neq; ++i) {
      if (!r0[static_cast<std::size_t>(i)].is_number()) {
        throw ParseError("/r0bar/" + std::to_string(i) + ": expected a number");
      }
      mf.model.r0bar(i) = r0[static_cast<std::size_t>(i)].get<double>();
    }
  } catch (const ParseError& e) {
    throw ParseError(path + e.what());
  }
  if (doc.contains("name")) mf.name = doc["name"].get<std::string>();
  if (doc.contains("description")) {
    mf.description = doc["description"].get<std::string>();
  }
  try {
    mf.model.check_dimensions();
  } catch (const std::invalid_argument& e) {
    throw ParseError(path + ": " + e.what());
  }
  return mf;
}

std::string model_to_json(const ModelFile& mf) {
  json doc;
  if (!mf.name.empty()) doc["name"] = mf.name;
  if (!mf.description.empty()) doc["description"] = mf.description;
  doc["E"] = matrix_to_json(mf.model.E);
  doc["A"] = matrix_to_json(mf.model.A);
  doc["B"] = matrix_to_json(mf.model.B);
  doc["F"] = matrix_to_json(mf.model.F);
  doc["H"] = matrix_to_json(mf.model.H);
  doc["R"] = matrix_to_json(mf.model.R);
  doc["P0"] = matrix_to_json(mf.model.P0);
  doc["r0bar"] = vector_to_json(mf.model.r0bar);
  return doc.dump(2) + "\n";
}

void save_model(const std::string& path, const ModelFile& mf) {
  atomic_write(path, model_to_json(mf));
}

Eigen::MatrixXd load_sequence_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (line.rfind("k", 0) != 0) {
    throw ParseError(path + ":1: header must start with the k column");
  }
  std::vector<std::vector<double>> cols_per_row;
  int lineno = 1;
  int expected_k = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      try {
        const double v = std::stod(cell);
        if (first) {
          if (static_cast<int>(v) != expected_k) {
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected k=" + std::to_string(expected_k));
          }
          first = false;
        } else {
          vals.push_back(v);
        }
      } catch (const std::invalid_argument&) {
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": cannot parse '" + cell + "' as a number");
      } catch (const std::out_of_range&) {
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": value out of range: '" + cell + "'");
      }
    }
    if (first) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": missing k");
    }
    if (!cols_per_row.empty() && vals.size() != cols_per_row.front().size()) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": inconsistent column count");
    }
    cols_per_row.push_back(std::move(vals));
    ++expected_k;
  }
  if (cols_per_row.empty()) throw ParseError(path + ": no data rows");
  const auto d = static_cast<Eigen::Index>(cols_per_row.front().size());
  Eigen::MatrixXd out(d, static_cast<Eigen::Index>(cols_per_row.size()));
  for (std::size_t k = 0; k < cols_per_row.size(); ++k) {
    for (Eigen::Index i = 0; i < d; ++i) {
      out(i, static_cast<Eigen::Index>(k)) = cols_per_row[k][static_cast<std::size_t>(i)];
    }
  }
  return out;
}

void save_sequence_csv(const std::string& path, const std::string& prefix,
                       const Eigen::MatrixXd& values) {
  std::ostringstream os;
  os << "k";
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    os << "," << prefix << "_" << i;
  }
  os << "\n";
  for (Eigen::Index k = 0; k < values.cols(); ++k) {
    os << k;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      os << "," << format_double(values(i, k));
    }
    os << "\n";
  }
  atomic_write(path, os.str());
}

std::string trajectory_to_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "k";
  for (Eigen::Index i = 0; i < traj.states.rows(); ++i) os << ",x_" << i;
  for (Eigen::Index i = 0; i < traj.measurements.rows(); ++i) os << ",y_" << i;
  for (Eigen::Index i = 0; i < traj.inputs.rows(); ++i) os << ",u_" << i;
  os << "\n";
  for (int k = 0; k <= traj.horizon; ++k) {
    os << k;
    for (Eigen::Index i = 0; i < traj.states.rows(); ++i) {
      os << "," << format_double(traj.states(i, k));
    }
    for (Eigen::Index i = 0; i < traj.measurements.rows(); ++i) {
      os << "," << format_double(traj.measurements(i, k));
    }
    for (Eigen::Index i = 0; i < traj.inputs.rows(); ++i) {
      os << "," << format_double(traj.inputs(i, k));
    }
    os << "\n";
  }
  return os.str();
}

std::string trajectory_to_json(const Trajectory& traj, std::uint64_t seed) {
  json doc;
  doc["horizon"] = traj.horizon;
  doc["seed"] = seed;
  doc["states"] = matrix_to_json(traj.states);
  doc["measurements"] = matrix_to_json(traj.measurements);
  doc["inputs"] = matrix_to_json(traj.inputs);
  doc["disturbances"] = matrix_to_json(traj.disturbances);
  doc["measurement_noise"] = matrix_to_json(traj.meas_noise);
  if (traj.free_states.rows() > 0) {
    doc["free_states"] = matrix_to_json(traj.free_states);
  }
  return doc.dump(2) + "\n";
}

std::string estimate_to_csv(const MapEstimate& est) {
  std::ostringstream os;
  const auto t_end = static_cast<int>(est.states.cols()) - 1;
  os << "k";
  for (Eigen::Index i = 0; i < est.states.rows(); ++i) os << ",xhat_" << i;
  os << ",measurement_residual_norm,dynamics_residual_norm\n";
  for (int k = 0; k <= t_end; ++k) {
    os << k;
    for (Eigen::Index i = 0; i < est.states.rows(); ++i) {
      os << "," << format_double(est.states(i, k));
    }
    os << "," << format_double(est.measurement_residuals.col(k).norm());
    // The terminal step has no outgoing dynamics equation.
    if (k < t_end) {
      os << "," << format_double(est.dynamics_residuals.col(k).norm());
    } else {
      os << ",nan";
    }
    os << "\n";
  }
  return os.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("atomic_write: cannot open " + tmp.string());
    }
    out << content;
    if (!out.good()) {
      throw std::runtime_error("atomic_write: failed writing " + tmp.string());
    }
  }
  fs::rename(tmp, target);
}

std::string file_digest_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::uint64_t hash = 14695981039346656037ULL;
  char c;
  while (in.get(c)) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace descest::io
