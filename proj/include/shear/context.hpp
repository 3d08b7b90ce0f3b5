#pragma once

#include <memory>

#include "shear/assembly.hpp"
#include "shear/saddle.hpp"

namespace shear {

/// Per-problem solver resources: the assembler, a saddle solver factorized
/// once with the unit strain block, a work solver for Jacobians, and the
/// dual-norm solver. Not thread-safe; use one context per thread.
class SolverContext {
 public:
  explicit SolverContext(std::shared_ptr<const Assembler> assembler);
  static std::shared_ptr<SolverContext> create(const Mesh& mesh, int quad_order = 4,
                                               Exec exec = Exec::parallel);

  const Assembler& assembler() const { return *asm_; }
  std::shared_ptr<const Assembler> assembler_ptr() const { return asm_; }
  std::shared_ptr<const DofMap> dofs_ptr() const { return asm_->dofs_ptr(); }
  std::shared_ptr<const Discretization> disc_ptr() const { return asm_->disc_ptr(); }

  /// Saddle solver for the unit block (eps, eps), factorized once.
  const SaddleSolver& strain_solver() const { return strain_; }
  /// Scratch solver for variable velocity blocks.
  SaddleSolver& work_solver() { return work_; }
  const DualNorm& dual_norm();
  /// Discrete Korn constant, computed on first use.
  double korn_constant();

 private:
  std::shared_ptr<const Assembler> asm_;
  SaddleSolver strain_;
  SaddleSolver work_;
  std::unique_ptr<DualNorm> dual_;
  double korn_ = -1.0;
};

/// Largest c with (eps v, eps v) >= c ||v||_{H1}^2 over Dirichlet-reduced
/// discrete velocities, by Lanczos on the generalized eigenproblem.
double discrete_korn_constant(const Assembler& assembler, int max_iters = 300, double tol = 1e-13);

}  // namespace shear
