#pragma once

#include <stdexcept>
#include <string>

namespace descest {

/// A numerical rank decision was ambiguous at the requested tolerance.
/// Callers may retry with a different tolerance.
class IllConditioned : public std::runtime_error {
 public:
  explicit IllConditioned(const std::string& what) : std::runtime_error(what) {}
};

/// The model violates a well-posedness requirement (over-determined rows,
/// non-causal algebraic part, failed estimableness, ...).
class ModelRejected : public std::runtime_error {
 public:
  explicit ModelRejected(const std::string& what) : std::runtime_error(what) {}
};

/// A covariance weight required by the solver is singular.
class SingularWeight : public std::runtime_error {
 public:
  explicit SingularWeight(const std::string& what) : std::runtime_error(what) {}
};

/// The stacked estimation problem is column-rank deficient: some state
/// direction is determined neither by the dynamics nor by a measurement.
class Unestimable : public std::runtime_error {
 public:
  explicit Unestimable(const std::string& what) : std::runtime_error(what) {}
};

/// Equality constraints of the constrained solver admit no solution.
class Infeasible : public std::runtime_error {
 public:
  explicit Infeasible(const std::string& what) : std::runtime_error(what) {}
};

/// The recursive filter lost full-rank information at some step.
class LossOfInformation : public std::runtime_error {
 public:
  explicit LossOfInformation(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace descest
