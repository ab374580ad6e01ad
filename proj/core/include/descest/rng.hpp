#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace descest {

/// Counter-based pseudo-random generator with a platform-stable stream.
/// Every draw is a pure function of (seed, stream, counter), so sequences
/// are reproducible bit-for-bit across runs and machines.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  /// Uniform draw in the open interval (0, 1).
  double uniform();

  /// Standard normal draw (Box-Muller; pairs share one counter step).
  double normal();

  Eigen::VectorXd normal_vector(int n);

  std::uint64_t next_u64();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace descest
