#include "shear/state_solver.hpp"

#include <cmath>
#include <sstream>

#include "shear/assembly.hpp"

namespace shear {

void SolverConfig::validate() const {
  if (!(tol_residual > 0.0)) throw ParameterError("solver: tol_residual must be > 0");
  if (max_iters < 1 || picard_max_iters < 1) throw ParameterError("solver: iteration limits must be >= 1");
  if (!(linesearch > 0.0 && linesearch < 1.0)) throw ParameterError("solver: linesearch factor must lie in (0,1)");
  if (!(picard_relax > 0.0 && picard_relax <= 1.0)) throw ParameterError("solver: picard_relax must lie in (0,1]");
  if (!(min_step > 0.0 && min_step < 1.0)) throw ParameterError("solver: min_step must lie in (0,1)");
}

StateSolver::StateSolver(std::shared_ptr<SolverContext> ctx, PlasticityParams params)
    : ctx_(std::move(ctx)), params_(params) {
  params_.validate();
}

StateSolution StateSolver::solve_stokes(const FeField& u) const {
  const Assembler& a = assembler();
  require_field(u, a.dofs(), {Role::control}, "solve_stokes");
  const auto s = ctx_->strain_solver().solve(a.ops().mass * u.coefficients());
  Eigen::VectorXd y = s.velocity / params_.mu;
  a.zero_dirichlet(y);
  return {FeField(a.dofs_ptr(), Role::velocity, std::move(y)), FeField(a.dofs_ptr(), Role::pressure, s.pressure),
          0.0, 0, "stokes", {}};
}

double StateSolver::residual_norm(const StateSolution& s, const FeField& u, std::optional<RegParam> delta) const {
  return assembler()
      .residual(s.velocity.coefficients(), s.pressure.coefficients(), u.coefficients(), params_, delta)
      .norm();
}

StateSolution StateSolver::solve_nonsmooth(const FeField& u, const SolverConfig& cfg, const StateSolution* warm) {
  return solve(u, std::nullopt, cfg, warm);
}

StateSolution StateSolver::solve_regularized(const FeField& u, RegParam delta, const SolverConfig& cfg,
                                             const StateSolution* warm) {
  delta.validate(params_.g);
  return solve(u, delta, cfg, warm);
}

StateSolution StateSolver::solve(const FeField& u, std::optional<RegParam> delta, const SolverConfig& cfg,
                                 const StateSolution* warm) {
  cfg.validate();
  const Assembler& a = assembler();
  require_field(u, a.dofs(), {Role::control}, "state solve");
  const int nv = a.num_velocity();
  const Eigen::VectorXd& uc = u.coefficients();

  Eigen::VectorXd y, p;
  if (warm) {
    require_field(warm->velocity, a.dofs(), {Role::velocity}, "state warm start");
    y = warm->velocity.coefficients();
    p = warm->pressure.coefficients();
  } else {
    const StateSolution s = solve_stokes(u);
    y = s.velocity.coefficients();
    p = s.pressure.coefficients();
  }

  std::vector<IterationRecord> history;
  auto record = [&](int it, double res, double step, const char* method) {
    history.push_back({it, res, step, method});
    if (cfg.observer) cfg.observer(history.back());
  };
  auto residual = [&](const Eigen::VectorXd& yy, const Eigen::VectorXd& pp) {
    return a.residual(yy, pp, uc, params_, delta);
  };
  auto finish = [&](const char* method, double res, int iters) {
    a.zero_dirichlet(y);
    return StateSolution{FeField(a.dofs_ptr(), Role::velocity, y), FeField(a.dofs_ptr(), Role::pressure, p), res,
                         iters, method, std::move(history)};
  };

  Eigen::VectorXd r = residual(y, p);
  double rn = r.norm();
  record(0, rn, 0.0, "initial");
  if (rn <= cfg.tol_residual) return finish("initial", rn, 0);

  const char* newton_name = delta ? "newton" : "semismooth-newton";
  int it = 0;
  if (cfg.newton) {
    SaddleSolver& lin = ctx_->work_solver();
    bool stalled = false;
    while (it < cfg.max_iters && !stalled) {
      ++it;
      const auto eps = a.strain(y);
      std::vector<PointTangent> tg(eps.size());
      for (std::size_t k = 0; k < eps.size(); ++k) {
        tg[k] = delta ? tangents::regularized(eps[k], params_.g, *delta) : tangents::generalized(eps[k], params_.g);
      }
      lin.factorize(a.velocity_block(params_.mu, params_.nu, &tg));
      const auto d = lin.solve(-r.head(nv), -r.tail(a.num_pressure()));
      double t = 1.0;
      while (true) {
        const Eigen::VectorXd yt = y + t * d.velocity;
        const Eigen::VectorXd pt = p + t * d.pressure;
        const Eigen::VectorXd rt = residual(yt, pt);
        const double rtn = rt.norm();
        if (rtn <= (1.0 - 1e-4 * t) * rn || rtn <= cfg.tol_residual) {
          y = yt;
          p = pt;
          r = rt;
          rn = rtn;
          break;
        }
        t *= cfg.linesearch;
        if (t < cfg.min_step) {
          stalled = true;
          break;
        }
      }
      record(it, rn, stalled ? 0.0 : t, newton_name);
      if (rn <= cfg.tol_residual) return finish(newton_name, rn, it);
    }
  }

  // Richardson on the monotone splitting, preconditioned by the strain block:
  //   c (eps dy, eps v) - (dp, div v) = -R(y, p),  c = mu + nu L / relax.
  const double lip = delta ? kRegularizedLipschitz : 1.0;
  const double c = (params_.mu + params_.nu * lip) / cfg.picard_relax;
  const SaddleSolver& strain = ctx_->strain_solver();
  for (int k = 1; k <= cfg.picard_max_iters; ++k) {
    const auto d = strain.solve(-r.head(nv), -c * r.tail(a.num_pressure()));
    y += d.velocity / c;
    p += d.pressure;
    a.zero_dirichlet(y);
    r = residual(y, p);
    rn = r.norm();
    record(it + k, rn, 1.0 / c, "picard");
    if (rn <= cfg.tol_residual) return finish("picard", rn, it + k);
  }
  std::ostringstream os;
  os << "state solve did not reach tol_residual=" << cfg.tol_residual << " (last residual " << rn << ")";
  throw ConvergenceError(os.str(), std::move(history));
}

}  // namespace shear
