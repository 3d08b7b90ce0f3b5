#pragma once

#include <Eigen/Sparse>

#include <memory>

#include "shear/assembly.hpp"

namespace shear {

/// Sparse direct solver for [A B^T; B 0] with homogeneous Dirichlet rows
/// eliminated (identity rows and columns) and one pressure dof pinned.
/// The symbolic analysis is done once; factorize() only refreshes values,
/// so every velocity block must carry the assembler's pattern.
class SaddleSolver {
 public:
  explicit SaddleSolver(const Assembler& assembler);
  ~SaddleSolver();
  SaddleSolver(const SaddleSolver&) = delete;
  SaddleSolver& operator=(const SaddleSolver&) = delete;

  void factorize(const SparseMatrix& velocity_block);
  bool factorized() const { return factorized_; }

  struct Solution {
    Eigen::VectorXd velocity;
    Eigen::VectorXd pressure;  // zero mean
  };
  /// Solves with momentum load f (Dirichlet entries ignored) and divergence data q.
  Solution solve(const Eigen::VectorXd& f, const Eigen::VectorXd& q) const;
  Solution solve(const Eigen::VectorXd& f) const;

  /// Removes the mean from a pressure vector.
  void remove_mean(Eigen::VectorXd& p) const;

 private:
  struct Backend;
  const Assembler& asm_;
  int nv_, np_, pinned_ = 0;
  SparseMatrix k_;
  std::vector<int> a_slot_;                 // pattern value index -> K value index or -1
  std::vector<std::pair<int, int>> b_slot_;  // B value index -> (K index of B, K index of B^T)
  std::vector<int> unit_slots_;             // Dirichlet and pinned diagonals
  std::unique_ptr<Backend> backend_;
  bool factorized_ = false;
};

/// Norm of a velocity residual functional in the dual of the discretely
/// solenoidal subspace under the H1 inner product: solve
/// [G B^T; B 0] w = [r; 0] and return sqrt(w^T G w).
class DualNorm {
 public:
  explicit DualNorm(const Assembler& assembler);
  double operator()(const Eigen::VectorXd& r) const;

 private:
  const Assembler& asm_;
  SaddleSolver solver_;
};

}  // namespace shear
