#include "shear/stationarity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace shear {

QuadTensorField compute_multiplier(const Assembler& a, const FeField& y, const FeField& p, double g, RegParam delta) {
  delta.validate(g);
  require_field(y, a.dofs(), {Role::velocity}, "compute_multiplier(y)");
  require_field(p, a.dofs(), {Role::adjoint}, "compute_multiplier(p)");
  const auto ey = a.strain(y.coefficients());
  const auto ep = a.strain(p.coefficients());
  QuadTensorField lam{std::vector<SymTensor2>(ey.size()), a.disc_ptr()};
  for (std::size_t k = 0; k < ey.size(); ++k) lam.values[k] = smoothed_shear_excess_jacobian(ey[k], ep[k], g, delta);
  return lam;
}

RegionMasks classify_sets(const Assembler& a, const FeField& y, double g, double band_tol) {
  if (!(band_tol > 0.0)) throw ParameterError("classify_sets requires band_tol > 0");
  require_field(y, a.dofs(), {Role::velocity, Role::control}, "classify_sets");
  const auto ey = a.strain(y.coefficients());
  RegionMasks m;
  m.band_tol = band_tol;
  m.region.resize(ey.size());
  for (std::size_t k = 0; k < ey.size(); ++k) {
    const double s = ey[k].norm() - g;
    const double w = a.disc().weight(k);
    if (s < -band_tol) {
      m.region[k] = Region::below;
      m.measure_below += w;
    } else if (s > band_tol) {
      m.region[k] = Region::above;
      m.measure_above += w;
    } else {
      m.region[k] = Region::band;
      m.measure_band += w;
      ++m.band_points;
    }
  }
  return m;
}

WeakResiduals check_weak_stationarity(SolverContext& ctx, const FeField& u, const FeField& y, const FeField& p,
                                      const QuadTensorField& lambda, const ControlProblem& problem,
                                      const RegionMasks& masks) {
  const Assembler& a = ctx.assembler();
  const PlasticityParams& prm = problem.params;
  const auto ey = a.strain(y.coefficients());
  const auto ep = a.strain(p.coefficients());
  WeakResiduals w;

  double below2 = 0.0, above2 = 0.0, lam2 = 0.0, ref_above2 = 0.0;
  for (std::size_t k = 0; k < ey.size(); ++k) {
    const double wt = a.disc().weight(k);
    lam2 += wt * lambda.values[k].squared_norm();
    if (masks.region[k] == Region::below) {
      below2 += wt * lambda.values[k].squared_norm();
    } else if (masks.region[k] == Region::above) {
      const SymTensor2 target = shear_excess_dir(ey[k], ep[k], prm.g, 0.0);
      above2 += wt * (lambda.values[k] - target).squared_norm();
      ref_above2 += wt * target.squared_norm();
    }
  }
  w.inactive_lambda = std::sqrt(below2);
  w.above_lambda = std::sqrt(above2);
  w.inactive_lambda_scaled = w.inactive_lambda / (1.0 + std::sqrt(lam2));
  w.above_lambda_scaled = w.above_lambda / (1.0 + std::sqrt(ref_above2));

  const DualNorm& dual = ctx.dual_norm();
  const Eigen::VectorXd load = a.ops().mass * (y.coefficients() - problem.z_d.coefficients());
  Eigen::VectorXd r = prm.mu * (a.ops().strain * p.coefficients()) +
                      prm.nu * kernels::integrate_stress(a.disc(), lambda.values, a.exec()) - load;
  a.zero_dirichlet(r);
  w.adjoint = dual(r);
  w.adjoint_scaled = w.adjoint / (1.0 + dual(load));

  const Eigen::VectorXd go = problem.alpha * u.coefficients() + p.coefficients();
  w.gradient = a.l2_norm(go);
  w.gradient_scaled = w.gradient / (1.0 + a.l2_norm(p.coefficients()));
  w.gradient_proximal = a.l2_norm(go + u.coefficients() - problem.u_bar.coefficients());

  const Eigen::VectorXd pz = Eigen::VectorXd::Zero(a.num_pressure());
  Eigen::VectorXd rs = a.residual(y.coefficients(), pz, u.coefficients(), prm, std::nullopt);
  w.state = dual(rs);
  Eigen::VectorXd mu_load = a.ops().mass * u.coefficients();
  a.zero_dirichlet(mu_load);
  w.state_scaled = w.state / (1.0 + dual(mu_load));
  return w;
}

SignStatistics check_strong_stationarity(const Assembler& a, const FeField& y, const QuadTensorField& lambda,
                                         const RegionMasks& masks, double g) {
  const auto ey = a.strain(y.coefficients());
  SignStatistics st;
  double lam_inf = 0.0;
  for (const auto& l : lambda.values) lam_inf = std::max(lam_inf, l.norm());
  st.tol_sign = 1e-8 * g * lam_inf;
  double sum = 0.0, viol = 0.0;
  bool first = true;
  for (std::size_t k = 0; k < ey.size(); ++k) {
    if (masks.region[k] != Region::band) continue;
    const double s = contract(lambda.values[k], ey[k]);
    const double w = a.disc().weight(k);
    st.max = first ? s : std::max(st.max, s);
    first = false;
    ++st.band_points;
    st.band_measure += w;
    sum += w * s;
    if (s > st.tol_sign) viol += w;
  }
  st.vacuous = st.band_points == 0;
  if (!st.vacuous) {
    st.mean = sum / st.band_measure;
    st.violating_fraction = viol / st.band_measure;
  }
  return st;
}

std::vector<BProbe> check_b_stationarity(std::shared_ptr<SolverContext> ctx, const FeField& u,
                                         const ControlProblem& problem, const std::vector<FeField>& directions,
                                         const SolverConfig& state_cfg, const LinearizedConfig& lin_cfg,
                                         double tol_b, StateSolution* state_out) {
  const Assembler& a = ctx->assembler();
  StateSolver state(ctx, problem.params);
  StateSolution s = state.solve_nonsmooth(u, state_cfg);
  Sensitivity sens(ctx, problem.params);
  const Eigen::VectorXd misfit = s.velocity.coefficients() - problem.z_d.coefficients();
  std::vector<BProbe> probes;
  for (std::size_t i = 0; i < directions.size(); ++i) {
    BProbe pr;
    pr.id = static_cast<int>(i);
    try {
      const LinearizedSolution z = sens.solve_linearized(s.velocity, directions[i], lin_cfg);
      pr.value = a.l2_inner(misfit, z.z.coefficients()) +
                 problem.alpha * a.l2_inner(u.coefficients(), directions[i].coefficients());
      pr.flagged = pr.value < -tol_b;
    } catch (const std::exception& e) {
      pr.skipped = true;
      pr.flagged = true;
      pr.error = e.what();
    }
    probes.push_back(pr);
  }
  if (state_out) *state_out = std::move(s);
  return probes;
}

FeField random_direction(const Assembler& a, std::mt19937_64& rng, int modes) {
  std::normal_distribution<double> nd;
  std::vector<double> c(static_cast<std::size_t>(2 * modes * modes));
  for (double& v : c) v = nd(rng);
  const double pi = std::numbers::pi;
  FeField h = interpolate(a.dofs_ptr(), Role::control, [&](double x, double y) -> Eigen::Vector2d {
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    for (int k = 1; k <= modes; ++k) {
      for (int l = 1; l <= modes; ++l) {
        const double b = std::sin(k * pi * x) * std::sin(l * pi * y);
        const std::size_t i = static_cast<std::size_t>((k - 1) * modes + (l - 1));
        v(0) += c[2 * i] * b;
        v(1) += c[2 * i + 1] * b;
      }
    }
    return v;
  });
  const double n = a.l2_norm(h.coefficients());
  return FeField(a.dofs_ptr(), Role::control, h.coefficients() / n);
}

StationarityReport certify(std::shared_ptr<SolverContext> ctx, const ControlProblem& problem, const FeField& u,
                           const FeField& y, const FeField& p, RegParam delta, const CertifyConfig& cfg) {
  problem.validate();
  const Assembler& a = ctx->assembler();
  const double g = problem.params.g;
  StationarityReport rep;
  rep.g = g;
  rep.delta = delta.delta;
  rep.band_tol = cfg.band_tol > 0.0 ? cfg.band_tol : reporting_band(g);
  rep.regions = classify_sets(a, y, g, rep.band_tol);
  const QuadTensorField lambda = compute_multiplier(a, y, p, g, delta);
  rep.weak = check_weak_stationarity(*ctx, u, y, p, lambda, problem, rep.regions);
  rep.sign = check_strong_stationarity(a, y, lambda, rep.regions, g);

  std::mt19937_64 rng(cfg.seed);
  std::vector<FeField> dirs;
  for (int i = 0; i < cfg.num_probes; ++i) dirs.push_back(random_direction(a, rng));
  // The regularization does not resolve |eps y| - g below delta, so by
  // default points that close to the kink take the one-sided branch.
  LinearizedConfig lin = cfg.linearized;
  if (lin.band_tol < 0.0) lin.band_tol = std::max(lin.band(g), delta.delta);
  rep.probe_band = lin.band_tol;
  StateSolution s;
  // tol_b depends on j at the nonsmooth state; probe values do not, so evaluate them first.
  rep.probes = check_b_stationarity(ctx, u, problem, dirs, cfg.state, lin, 0.0, &s);
  rep.j_value = objective_value(a, problem, u, s.velocity, GradientMode::original);
  rep.tol_b = 1e-6 * (1.0 + std::abs(rep.j_value));
  rep.min_probe = rep.probes.empty() ? 0.0 : rep.probes.front().value;
  for (auto& pr : rep.probes) {
    if (!pr.skipped) pr.flagged = pr.value < -rep.tol_b;
    rep.min_probe = std::min(rep.min_probe, pr.value);
  }
  rep.state_gap = a.h1_norm(s.velocity.coefficients() - y.coefficients());
  return rep;
}

}  // namespace shear
