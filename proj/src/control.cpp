#include "shear/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "shear/stationarity.hpp"

namespace shear {

const char* anchor_policy_name(AnchorPolicy p) {
  switch (p) {
    case AnchorPolicy::self_consistent: return "self_consistent";
    case AnchorPolicy::previous: return "previous";
    case AnchorPolicy::zero: return "zero";
    case AnchorPolicy::fixed: return "fixed";
  }
  return "unknown";
}

AnchorPolicy parse_anchor_policy(const std::string& s) {
  if (s == "self_consistent") return AnchorPolicy::self_consistent;
  if (s == "previous") return AnchorPolicy::previous;
  if (s == "zero") return AnchorPolicy::zero;
  if (s == "fixed") return AnchorPolicy::fixed;
  throw ParameterError("unknown anchor policy '" + s + "' (expected self_consistent, previous, zero or fixed)");
}

void ControlProblem::validate() const {
  params.validate();
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    std::ostringstream os;
    os << "control cost alpha must be finite and > 0 (alpha=" << alpha << ")";
    throw ParameterError(os.str());
  }
  if (z_d.empty() || u_bar.empty()) throw ShapeError("control problem requires z_d and u_bar fields");
  require_field(z_d, u_bar.dofs(), {Role::control}, "ControlProblem(z_d)");
  require_field(u_bar, z_d.dofs(), {Role::control}, "ControlProblem(u_bar)");
}

double objective_value(const Assembler& a, const ControlProblem& problem, const FeField& u, const FeField& y,
                       GradientMode mode) {
  const Eigen::VectorXd e = y.coefficients() - problem.z_d.coefficients();
  double j = 0.5 * a.l2_inner(e, e) + 0.5 * problem.alpha * a.l2_inner(u.coefficients(), u.coefficients());
  if (mode == GradientMode::proximal) {
    const Eigen::VectorXd d = u.coefficients() - problem.u_bar.coefficients();
    j += 0.5 * a.l2_inner(d, d);
  }
  return j;
}

namespace {

SparseMatrix regularized_block(const Assembler& a, const FeField& y, const PlasticityParams& params, RegParam delta) {
  const auto eps = a.strain(y.coefficients());
  std::vector<PointTangent> tg(eps.size());
  for (std::size_t k = 0; k < eps.size(); ++k) tg[k] = tangents::regularized(eps[k], params.g, delta);
  return a.velocity_block(params.mu, params.nu, &tg);
}

}  // namespace

AdjointSolution solve_adjoint_regularized(SolverContext& ctx, const FeField& y, const ControlProblem& problem,
                                          RegParam delta) {
  problem.validate();
  delta.validate(problem.params.g);
  const Assembler& a = ctx.assembler();
  require_field(y, a.dofs(), {Role::velocity}, "solve_adjoint_regularized");
  const SparseMatrix k = regularized_block(a, y, problem.params, delta);
  SaddleSolver& lin = ctx.work_solver();
  lin.factorize(k);
  const Eigen::VectorXd rhs = a.ops().mass * (y.coefficients() - problem.z_d.coefficients());
  auto s = lin.solve(rhs);
  a.zero_dirichlet(s.velocity);
  Eigen::VectorXd r = k * s.velocity + a.ops().divergence.transpose() * s.pressure - rhs;
  a.zero_dirichlet(r);
  const double res = std::sqrt(r.squaredNorm() + (a.ops().divergence * s.velocity).squaredNorm());
  return {FeField(a.dofs_ptr(), Role::adjoint, std::move(s.velocity)), FeField(a.dofs_ptr(), Role::pressure, s.pressure),
          res};
}

FeField solve_linearized_regularized(SolverContext& ctx, const FeField& y, const FeField& h,
                                     const PlasticityParams& params, RegParam delta) {
  params.validate();
  delta.validate(params.g);
  const Assembler& a = ctx.assembler();
  require_field(y, a.dofs(), {Role::velocity}, "solve_linearized_regularized(y)");
  require_field(h, a.dofs(), {Role::control}, "solve_linearized_regularized(h)");
  SaddleSolver& lin = ctx.work_solver();
  lin.factorize(regularized_block(a, y, params, delta));
  auto s = lin.solve(a.ops().mass * h.coefficients());
  a.zero_dirichlet(s.velocity);
  return FeField(a.dofs_ptr(), Role::direction, std::move(s.velocity));
}

FeField reduced_gradient(const FeField& u, const FeField& p, const ControlProblem& problem, GradientMode mode) {
  require_field(u, problem.z_d.dofs(), {Role::control}, "reduced_gradient(u)");
  require_field(p, problem.z_d.dofs(), {Role::adjoint}, "reduced_gradient(p)");
  Eigen::VectorXd g = p.coefficients() + problem.alpha * u.coefficients();
  if (mode == GradientMode::proximal) g += u.coefficients() - problem.u_bar.coefficients();
  return FeField(u.dofs_ptr(), Role::control, std::move(g));
}

double OptimizerConfig::tolerance(const Assembler& a, const ControlProblem& problem) const {
  if (tol_grad > 0.0) return tol_grad;
  return 1e-8 * (1.0 + a.l2_norm(problem.z_d.coefficients()));
}

void OptimizerConfig::validate() const {
  if (max_iters < 0) throw ParameterError("optimizer: max_iters must be >= 0");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ParameterError("optimizer: armijo_c must lie in (0,1)");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw ParameterError("optimizer: backtrack must lie in (0,1)");
  if (!(initial_step > 0.0)) throw ParameterError("optimizer: initial_step must be > 0");
  if (!(bb_min > 0.0 && bb_max > bb_min)) throw ParameterError("optimizer: need 0 < bb_min < bb_max");
  state.validate();
}

ReducedFunctional::ReducedFunctional(std::shared_ptr<SolverContext> ctx, ControlProblem problem, RegParam delta,
                                     GradientMode mode, SolverConfig state_cfg)
    : ctx_(std::move(ctx)), problem_(std::move(problem)), delta_(delta), mode_(mode),
      state_cfg_(std::move(state_cfg)), state_(ctx_, problem_.params) {
  problem_.validate();
  delta_.validate(problem_.params.g);
}

double ReducedFunctional::value(const FeField& u, const StateSolution* warm, StateSolution* state_out) {
  StateSolution s = state_.solve_regularized(u, delta_, state_cfg_, warm);
  const double j = objective_value(ctx_->assembler(), problem_, u, s.velocity, mode_);
  if (state_out) *state_out = std::move(s);
  return j;
}

ReducedFunctional::Evaluation ReducedFunctional::evaluate(const FeField& u, const StateSolution* warm) {
  Evaluation e;
  e.j = value(u, warm, &e.state);
  e.adjoint = solve_adjoint_regularized(*ctx_, e.state.velocity, problem_, delta_);
  e.gradient = reduced_gradient(u, e.adjoint.p, problem_, mode_);
  return e;
}

OptimizeResult optimize_regularized(std::shared_ptr<SolverContext> ctx, const ControlProblem& problem,
                                    RegParam delta, const FeField& u0, const OptimizerConfig& cfg, GradientMode mode,
                                    const StateSolution* warm) {
  cfg.validate();
  problem.validate();
  delta.validate(problem.params.g);
  const Assembler& a = ctx->assembler();
  require_field(u0, a.dofs(), {Role::control}, "optimize_regularized(u0)");
  ReducedFunctional fn(ctx, problem, delta, mode, cfg.state);

  OptimizeResult res;
  res.tol_grad = cfg.tolerance(a, problem);
  FeField u = u0;
  auto cur = fn.evaluate(u, warm);
  double gnorm = a.l2_norm(cur.gradient.coefficients());
  res.history.push_back({0, cur.j, gnorm, 0.0, 0});
  double step = cfg.initial_step;
  res.status = "max_iters";
  int it = 0;
  for (; it < cfg.max_iters && gnorm > res.tol_grad; ++it) {
    const Eigen::VectorXd& g = cur.gradient.coefficients();
    const double g2 = gnorm * gnorm;
    // Allowance for inexact evaluations of j: rounding, plus the first-order
    // effect p . r of the state residuals at both points.
    const double pr = cur.adjoint.p.coefficients().norm();
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(cur.j)) +
                         pr * cur.state.residual;
    double s = step;
    int backtracks = 0;
    bool accepted = false;
    StateSolution trial_state;
    FeField trial;
    double jt = 0.0;
    while (s >= cfg.min_step) {
      trial = FeField(a.dofs_ptr(), Role::control, u.coefficients() - s * g);
      jt = fn.value(trial, &cur.state, &trial_state);
      if (jt <= cur.j - cfg.armijo_c * s * g2 + slack + pr * trial_state.residual) {
        accepted = true;
        break;
      }
      s *= cfg.backtrack;
      ++backtracks;
    }
    if (!accepted) {
      res.status = "stalled";
      break;
    }
    auto next = fn.evaluate(trial, &trial_state);
    // BB1 step from the accepted pair, in the L2 inner product.
    const Eigen::VectorXd du = trial.coefficients() - u.coefficients();
    const Eigen::VectorXd dg = next.gradient.coefficients() - g;
    const double sy = a.l2_inner(du, dg);
    const double ss = a.l2_inner(du, du);
    step = sy > 0.0 ? std::clamp(ss / sy, cfg.bb_min, cfg.bb_max) : std::min(2.0 * s, cfg.bb_max);
    u = trial;
    cur = std::move(next);
    gnorm = a.l2_norm(cur.gradient.coefficients());
    res.history.push_back({it + 1, cur.j, gnorm, s, backtracks});
  }
  res.converged = gnorm <= res.tol_grad;
  if (res.converged) res.status = "converged";
  res.iterations = it;
  res.u = u;
  res.j = cur.j;
  res.grad_norm = gnorm;
  res.state = std::move(cur.state);
  res.adjoint = std::move(cur.adjoint);
  res.gradient = std::move(cur.gradient);
  return res;
}

void PathSchedule::validate(double g) const {
  if (deltas.empty()) throw ParameterError("path schedule requires at least one delta");
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    RegParam{deltas[k]}.validate(g);
    if (k > 0 && !(deltas[k] < deltas[k - 1])) {
      std::ostringstream os;
      os << "path schedule must be strictly decreasing (delta[" << k << "]=" << deltas[k] << " >= delta["
         << k - 1 << "]=" << deltas[k - 1] << ")";
      throw ParameterError(os.str());
    }
  }
}

PathResult delta_path(std::shared_ptr<SolverContext> ctx, const ControlProblem& problem, const PathSchedule& schedule,
                      const OptimizerConfig& cfg, AnchorPolicy anchor) {
  problem.validate();
  schedule.validate(problem.params.g);
  const Assembler& a = ctx->assembler();
  PathResult out;
  FeField u = FeField::zeros(a.dofs_ptr(), Role::control);
  const StateSolution* warm = nullptr;
  for (std::size_t k = 0; k < schedule.deltas.size(); ++k) {
    const RegParam delta{schedule.deltas[k]};
    const OptimizerConfig& scfg =
        (k < schedule.overrides.size() && schedule.overrides[k]) ? *schedule.overrides[k] : cfg;
    ControlProblem stage = problem;
    GradientMode mode = GradientMode::proximal;
    switch (anchor) {
      case AnchorPolicy::self_consistent: mode = GradientMode::original; break;
      case AnchorPolicy::previous: stage.u_bar = k == 0 ? FeField::zeros(a.dofs_ptr(), Role::control) : u; break;
      case AnchorPolicy::zero: stage.u_bar = FeField::zeros(a.dofs_ptr(), Role::control); break;
      case AnchorPolicy::fixed: break;
    }
    OptimizeResult r;
    try {
      r = optimize_regularized(ctx, stage, delta, u, scfg, mode, warm);
    } catch (const std::exception& e) {
      out.failure = std::string("stage ") + std::to_string(k) + ": " + e.what();
      return out;
    }
    if (anchor == AnchorPolicy::self_consistent) stage.u_bar = r.u;
    StageRecord rec;
    rec.delta = delta.delta;
    rec.iters = r.iterations;
    rec.j_value = r.j;
    rec.grad_norm = r.grad_norm;
    rec.tol_grad = r.tol_grad;
    rec.state_residual = r.state.residual;
    rec.multiplier_norm = compute_multiplier(a, r.state.velocity, r.adjoint.p, problem.params.g, delta).l2_norm();
    if (k > 0) {
      rec.control_distance = a.l2_norm(r.u.coefficients() - out.stages.back().u.coefficients());
      rec.state_distance = a.h1_norm(r.state.velocity.coefficients() - out.stages.back().state.velocity.coefficients());
    }
    rec.converged = r.converged;
    rec.status = r.status;
    out.table.push_back(rec);
    out.anchors.push_back(stage.u_bar);
    u = r.u;
    out.stages.push_back(std::move(r));
    warm = &out.stages.back().state;
    if (!out.stages.back().converged && out.stages.back().status == "stalled") {
      out.failure = "stage " + std::to_string(k) + " stalled";
      return out;
    }
  }
  out.complete = true;
  return out;
}

GradientCheck gradient_check(ReducedFunctional& j, const FeField& u, const FeField& h, double t) {
  const Assembler& a = j.context().assembler();
  auto ev = j.evaluate(u);
  const FeField up(a.dofs_ptr(), Role::control, u.coefficients() + t * h.coefficients());
  const FeField um(a.dofs_ptr(), Role::control, u.coefficients() - t * h.coefficients());
  const double jp = j.value(up, &ev.state);
  const double jm = j.value(um, &ev.state);
  GradientCheck c;
  c.directional_fd = (jp - jm) / (2.0 * t);
  c.directional_grad = a.l2_inner(ev.gradient.coefficients(), h.coefficients());
  c.rel_error = std::abs(c.directional_fd - c.directional_grad) /
                std::max(std::abs(c.directional_grad), 1e-300);
  return c;
}

}  // namespace shear
