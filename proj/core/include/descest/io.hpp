#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

#include "descest/estimator.hpp"
#include "descest/model.hpp"
#include "descest/sim.hpp"

namespace descest::io {

/// Parse failure with a location (file, line or JSON path) in the message.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// On-disk model document: named real matrices as row-major nested arrays
/// plus the prior mean vector and optional metadata.
struct ModelFile {
  StochasticDescriptorModel model;
  std::string name;
  std::string description;
};

ModelFile load_model(const std::string& path);
std::string model_to_json(const ModelFile& mf);
void save_model(const std::string& path, const ModelFile& mf);

/// Sequence CSV: header row, `k` column first, one row per step with k
/// running 0..T. Returns the d x (T+1) value matrix (column per step).
Eigen::MatrixXd load_sequence_csv(const std::string& path);
void save_sequence_csv(const std::string& path, const std::string& prefix,
                       const Eigen::MatrixXd& values);

std::string trajectory_to_csv(const Trajectory& traj);
std::string trajectory_to_json(const Trajectory& traj, std::uint64_t seed);
std::string estimate_to_csv(const MapEstimate& est);

/// Writes via a temporary file in the same directory plus rename.
void atomic_write(const std::string& path, const std::string& content);

/// FNV-1a 64-bit digest of a file's bytes, as a hex string.
std::string file_digest_hex(const std::string& path);

/// Full-precision decimal formatting (17 significant digits).
std::string format_double(double v);

}  // namespace descest::io
