#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace shear {

/// Invalid model, regularization or solver parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Degenerate or non-conforming triangulation.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Field/role/dof-count mismatch between arguments.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sparse factorization or solve failed.
class LinearSolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One step of a nonlinear iteration, kept for diagnostics.
struct IterationRecord {
  int iteration = 0;
  double residual = 0.0;
  double step = 0.0;
  std::string method;
};

/// Raised when an iterative solver exhausts its budget; carries the history.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<IterationRecord> history)
      : std::runtime_error(what), history_(std::move(history)) {}

  const std::vector<IterationRecord>& history() const { return history_; }
  double last_residual() const { return history_.empty() ? 0.0 : history_.back().residual; }

 private:
  std::vector<IterationRecord> history_;
};

}  // namespace shear
