#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shear/state_solver.hpp"

namespace shear {

enum class GradientMode { original, proximal };

/// How the proximal anchor u_bar of each path stage is chosen.
///   self_consistent: u_bar equals the stage's own minimizer, i.e. the stage
///                    optimizes the regularized functional without the
///                    proximal term (its gradient vanishes at u = u_bar);
///   previous:        previous stage's control (zero for the first stage);
///   zero:            u_bar = 0;
///   fixed:           the problem's u_bar for every stage.
enum class AnchorPolicy { self_consistent, previous, zero, fixed };

const char* anchor_policy_name(AnchorPolicy p);
AnchorPolicy parse_anchor_policy(const std::string& s);

struct ControlProblem {
  PlasticityParams params;
  double alpha = 1e-2;
  FeField z_d;    // L2 target, control role (boundary values allowed)
  FeField u_bar;  // proximal anchor, control role

  void validate() const;
};

/// Objective ||y - z_d||^2 / 2 + alpha ||u||^2 / 2 [+ ||u - u_bar||^2 / 2 in proximal mode].
double objective_value(const Assembler& a, const ControlProblem& problem, const FeField& u, const FeField& y,
                       GradientMode mode);

struct AdjointSolution {
  FeField p;         // adjoint role
  FeField pressure;  // adjoint pressure
  double residual = 0.0;
};

/// mu (eps p, eps v) + nu (m_delta'(eps y)^* eps p, eps v) - (pi, div v) = (y - z_d, v).
AdjointSolution solve_adjoint_regularized(SolverContext& ctx, const FeField& y, const ControlProblem& problem,
                                          RegParam delta);

/// Derivative S_delta'(u) h: the same symmetric saddle system with load (h, v).
FeField solve_linearized_regularized(SolverContext& ctx, const FeField& y, const FeField& h,
                                     const PlasticityParams& params, RegParam delta);

/// L2 Riesz representative of the reduced gradient:
/// proximal p + (alpha + 1) u - u_bar, original p + alpha u.
FeField reduced_gradient(const FeField& u, const FeField& p, const ControlProblem& problem, GradientMode mode);

struct OptimizerConfig {
  int max_iters = 200;
  double tol_grad = -1.0;   // negative selects 1e-8 (1 + ||z_d||_{L2})
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double initial_step = 1.0;
  double min_step = 1e-14;
  double bb_min = 1e-6;     // safeguards on the Barzilai-Borwein step
  double bb_max = 1e6;
  SolverConfig state;

  double tolerance(const Assembler& a, const ControlProblem& problem) const;
  void validate() const;
};

struct OptimizerStep {
  int iteration = 0;
  double j = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  int backtracks = 0;
};

struct OptimizeResult {
  FeField u;
  StateSolution state;
  AdjointSolution adjoint;
  FeField gradient;
  double j = 0.0;
  double grad_norm = 0.0;
  double tol_grad = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string status;  // "converged", "max_iters" or "stalled"
  std::vector<OptimizerStep> history;
};

/// Reduced functional j_delta and its gradient for a fixed regularization.
class ReducedFunctional {
 public:
  ReducedFunctional(std::shared_ptr<SolverContext> ctx, ControlProblem problem, RegParam delta, GradientMode mode,
                    SolverConfig state_cfg);

  const ControlProblem& problem() const { return problem_; }
  RegParam delta() const { return delta_; }
  GradientMode mode() const { return mode_; }
  SolverContext& context() { return *ctx_; }

  /// Value only; warm may seed the state solve.
  double value(const FeField& u, const StateSolution* warm = nullptr, StateSolution* state_out = nullptr);
  /// Value, state, adjoint and gradient.
  struct Evaluation {
    double j = 0.0;
    StateSolution state;
    AdjointSolution adjoint;
    FeField gradient;
  };
  Evaluation evaluate(const FeField& u, const StateSolution* warm = nullptr);

 private:
  std::shared_ptr<SolverContext> ctx_;
  ControlProblem problem_;
  RegParam delta_;
  GradientMode mode_;
  SolverConfig state_cfg_;
  StateSolver state_;
};

/// Barzilai-Borwein gradient descent with monotone Armijo backtracking.
OptimizeResult optimize_regularized(std::shared_ptr<SolverContext> ctx, const ControlProblem& problem,
                                    RegParam delta, const FeField& u0, const OptimizerConfig& cfg,
                                    GradientMode mode = GradientMode::proximal,
                                    const StateSolution* warm = nullptr);

struct PathSchedule {
  std::vector<double> deltas;
  std::vector<std::optional<OptimizerConfig>> overrides;  // per stage, may be shorter than deltas

  void validate(double g) const;
};

struct StageRecord {
  double delta = 0.0;
  int iters = 0;
  double j_value = 0.0;
  double grad_norm = 0.0;
  double tol_grad = 0.0;
  double state_residual = 0.0;
  double multiplier_norm = 0.0;
  double control_distance = 0.0;  // L2 distance to the previous stage's control
  double state_distance = 0.0;    // H1 distance to the previous stage's state
  bool converged = false;
  std::string status;
};

struct PathResult {
  std::vector<StageRecord> table;
  std::vector<OptimizeResult> stages;
  std::vector<FeField> anchors;  // u_bar actually used by each stage
  bool complete = false;         // all stages ran
  std::string failure;           // message of the stage failure that halted the path
};

/// Warm-started sequence of regularized optimizations along a decreasing schedule.
PathResult delta_path(std::shared_ptr<SolverContext> ctx, const ControlProblem& problem, const PathSchedule& schedule,
                      const OptimizerConfig& cfg, AnchorPolicy anchor = AnchorPolicy::self_consistent);

struct GradientCheck {
  double directional_fd = 0.0;  // central difference of j along h
  double directional_grad = 0.0;  // (grad, h)_{L2}
  double rel_error = 0.0;
};

/// Central-difference check of the reduced gradient along h with step t.
GradientCheck gradient_check(ReducedFunctional& j, const FeField& u, const FeField& h, double t);

}  // namespace shear
