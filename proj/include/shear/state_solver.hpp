#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shear/context.hpp"
#include "shear/errors.hpp"
#include "shear/fields.hpp"

namespace shear {

struct SolverConfig {
  double tol_residual = 1e-11;  // Euclidean norm of the mixed residual vector
  int max_iters = 60;           // Newton iterations
  double linesearch = 0.5;      // backtracking factor
  double picard_relax = 1.0;    // Richardson relaxation in (0, 1]
  double min_step = 1e-8;
  int picard_max_iters = 2000;
  bool newton = true;  // semismooth (nonsmooth) or exact (regularized) Newton before Picard
  /// Called once per iteration with the record appended to the history.
  std::function<void(const IterationRecord&)> observer;

  void validate() const;
};

struct StateSolution {
  FeField velocity;
  FeField pressure;
  double residual = 0.0;
  int iterations = 0;
  std::string method;
  std::vector<IterationRecord> history;
};

/// Solution operators S (nonsmooth) and S_delta (regularized) of the state equation
///   mu (eps y, eps v) + nu (m(eps y), eps v) - (p, div v) = (u, v),  div y = 0.
class StateSolver {
 public:
  StateSolver(std::shared_ptr<SolverContext> ctx, PlasticityParams params);

  const PlasticityParams& params() const { return params_; }
  SolverContext& context() { return *ctx_; }
  const Assembler& assembler() const { return ctx_->assembler(); }

  /// Stokes solution with load u (the g = infinity state).
  StateSolution solve_stokes(const FeField& u) const;

  StateSolution solve_nonsmooth(const FeField& u, const SolverConfig& cfg,
                                const StateSolution* warm = nullptr);
  StateSolution solve_regularized(const FeField& u, RegParam delta, const SolverConfig& cfg,
                                  const StateSolution* warm = nullptr);

  /// Euclidean norm of the mixed residual.
  double residual_norm(const StateSolution& s, const FeField& u, std::optional<RegParam> delta) const;

 private:
  StateSolution solve(const FeField& u, std::optional<RegParam> delta, const SolverConfig& cfg,
                      const StateSolution* warm);

  std::shared_ptr<SolverContext> ctx_;
  PlasticityParams params_;
};

/// Upper bound on the slope of the regularized radial profile, i.e. the
/// Lipschitz constant of m_delta used to scale the Picard fallback.
inline constexpr double kRegularizedLipschitz = 1.75;

}  // namespace shear
