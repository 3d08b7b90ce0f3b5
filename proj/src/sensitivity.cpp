#include "shear/sensitivity.hpp"

#include <cmath>
#include <sstream>

namespace shear {

void LinearizedConfig::validate() const {
  if (!(tol_residual > 0.0)) throw ParameterError("linearized solve: tol_residual must be > 0");
  if (max_iters < 1) throw ParameterError("linearized solve: max_iters must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw ParameterError("linearized solve: damping must lie in (0,1]");
}

Sensitivity::Sensitivity(std::shared_ptr<SolverContext> ctx, PlasticityParams params)
    : ctx_(std::move(ctx)), params_(params) {
  params_.validate();
}

namespace {

std::vector<PointTangent> frozen_tangents(const std::vector<SymTensor2>& ey, const std::vector<SymTensor2>& ez,
                                          double g, double band) {
  std::vector<PointTangent> tg(ey.size());
  for (std::size_t k = 0; k < ey.size(); ++k) tg[k] = tangents::directional(ey[k], ez[k], g, band);
  return tg;
}

}  // namespace

Eigen::VectorXd Sensitivity::apply_operator(const FeField& y, const Eigen::VectorXd& z, double band_tol) const {
  const Assembler& a = ctx_->assembler();
  const auto ey = a.strain(y.coefficients());
  const auto ez = a.strain(z);
  std::vector<SymTensor2> sigma(ey.size());
  for (std::size_t k = 0; k < ey.size(); ++k) {
    sigma[k] = shear_excess_dir(ey[k], ez[k], params_.g, band_tol);
  }
  Eigen::VectorXd t = params_.mu * (a.ops().strain * z) + params_.nu * kernels::integrate_stress(a.disc(), sigma, a.exec());
  a.zero_dirichlet(t);
  return t;
}

LinearizedSolution Sensitivity::solve_linearized(const FeField& y, const FeField& h, const LinearizedConfig& cfg) {
  cfg.validate();
  const Assembler& a = ctx_->assembler();
  require_field(y, a.dofs(), {Role::velocity}, "solve_linearized(y)");
  require_field(h, a.dofs(), {Role::control, Role::direction}, "solve_linearized(h)");
  const double band = cfg.band(params_.g);
  const int nv = a.num_velocity(), np = a.num_pressure();
  const auto ey = a.strain(y.coefficients());

  LinearizedSolution out;
  double band_weight = 0.0;
  for (std::size_t k = 0; k < ey.size(); ++k) {
    if (std::abs(ey[k].norm() - params_.g) <= band) {
      ++out.band_points;
      band_weight += a.disc().weight(k);
    }
  }
  out.band_fraction = band_weight / a.domain_area();

  const Eigen::VectorXd load = a.ops().mass * h.coefficients();
  auto residual = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& pi) {
    Eigen::VectorXd r = apply_operator(y, z, band) + a.ops().divergence.transpose() * pi - load;
    a.zero_dirichlet(r);
    return std::sqrt(r.squaredNorm() + (a.ops().divergence * z).squaredNorm());
  };
  auto linear_solve = [&](const Eigen::VectorXd& z_pattern) {
    const auto tg = frozen_tangents(ey, a.strain(z_pattern), params_.g, band);
    SaddleSolver& lin = ctx_->work_solver();
    lin.factorize(a.velocity_block(params_.mu, params_.nu, &tg));
    return lin.solve(load);
  };

  const double tol = cfg.tol_residual * (1.0 + load.norm());
  Eigen::VectorXd z = Eigen::VectorXd::Zero(nv), pi = Eigen::VectorXd::Zero(np);
  double rn = residual(z, pi);
  out.history.push_back({0, rn, 0.0, "initial"});
  for (int it = 1; it <= cfg.max_iters && rn > tol; ++it) {
    // Solve with the kink branch frozen at the sign pattern of z. If the
    // trial solution reproduces its own pattern it solves the equation.
    auto trial = linear_solve(z);
    a.zero_dirichlet(trial.velocity);
    const double rt = residual(trial.velocity, trial.pressure);
    if (rt <= tol || out.band_points == 0) {
      z = trial.velocity;
      pi = trial.pressure;
      rn = rt;
      out.history.push_back({it, rn, 1.0, "active-set"});
      out.iterations = it;
      if (out.band_points == 0) break;  // the operator is linear
      continue;
    } else {
      z += cfg.damping * (trial.velocity - z);
      pi += cfg.damping * (trial.pressure - pi);
      a.zero_dirichlet(z);
      rn = residual(z, pi);
      out.history.push_back({it, rn, cfg.damping, "damped-picard"});
    }
    out.iterations = it;
  }
  out.residual = rn;
  if (rn > tol) {
    std::ostringstream os;
    os << "linearized solve did not reach tolerance " << tol << " (last residual " << rn
       << ", band points " << out.band_points << ")";
    throw ConvergenceError(os.str(), out.history);
  }
  out.z = FeField(a.dofs_ptr(), Role::direction, z);
  out.pressure = FeField(a.dofs_ptr(), Role::pressure, pi);
  return out;
}

double fitted_order(const std::vector<double>& t, const std::vector<double>& r) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < t.size() && i < r.size(); ++i) {
    if (!(r[i] > 0.0) || !(t[i] > 0.0)) continue;
    const double x = std::log(t[i]), yv = std::log(r[i]);
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
    ++n;
  }
  if (n < 2) return 0.0;
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

DerivativeCheckReport Sensitivity::derivative_check(const FeField& u, const FeField& h, const std::vector<double>& t_seq,
                                                    const SolverConfig& state_cfg, const LinearizedConfig& lin_cfg) {
  for (std::size_t i = 0; i < t_seq.size(); ++i) {
    if (!(t_seq[i] > 0.0) || (i > 0 && !(t_seq[i] < t_seq[i - 1]))) {
      throw ParameterError("derivative_check: t sequence must be positive and strictly decreasing");
    }
  }
  const Assembler& a = ctx_->assembler();
  require_field(u, a.dofs(), {Role::control}, "derivative_check(u)");
  require_field(h, a.dofs(), {Role::control}, "derivative_check(h)");
  StateSolver state(ctx_, params_);
  const StateSolution base = state.solve_nonsmooth(u, state_cfg);

  DerivativeCheckReport rep;
  rep.t = t_seq;
  Eigen::VectorXd zs[2];
  for (int sign = 0; sign < 2; ++sign) {
    const double s = sign == 0 ? 1.0 : -1.0;
    const FeField hs(a.dofs_ptr(), Role::control, s * h.coefficients());
    const LinearizedSolution lin = solve_linearized(base.velocity, hs, lin_cfg);
    rep.band_points = lin.band_points;
    rep.band_fraction = lin.band_fraction;
    zs[sign] = lin.z.coefficients();
    std::vector<double>& r = sign == 0 ? rep.r_plus : rep.r_minus;
    for (double t : t_seq) {
      const FeField ut(a.dofs_ptr(), Role::control, u.coefficients() + t * hs.coefficients());
      const StateSolution st = state.solve_nonsmooth(ut, state_cfg, &base);
      const Eigen::VectorXd dq = (st.velocity.coefficients() - base.velocity.coefficients()) / t - zs[sign];
      r.push_back(a.h1_norm(dq));
    }
  }
  rep.z_norm_plus = a.h1_norm(zs[0]);
  rep.z_norm_minus = a.h1_norm(zs[1]);
  rep.order_plus = fitted_order(rep.t, rep.r_plus);
  rep.order_minus = fitted_order(rep.t, rep.r_minus);
  rep.asymmetry = a.h1_norm(zs[0] + zs[1]);
  return rep;
}

}  // namespace shear
