#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "shear/stationarity.hpp"

using namespace shear;
using namespace shear::testing;

namespace {

const PlasticityParams kParams{0.5, 1.0, 1.0};
const RegParam kDelta{0.05};

/// Linear field y(x) = A x with symmetric A of Frobenius norm `norm`.
FeField affine_field(std::shared_ptr<const DofMap> dofs, double norm) {
  Eigen::Matrix2d m;
  m << 0.3, -0.8, -0.8, -0.5;
  m *= norm / m.norm();
  return interpolate(std::move(dofs), Role::control,
                     [&](double x, double y) -> Eigen::Vector2d { return m * Eigen::Vector2d(x, y); });
}

QuadTensorField scaled_strain(const Assembler& a, const FeField& y, double c) {
  QuadTensorField f{a.strain(y.coefficients()), a.disc_ptr()};
  for (auto& v : f.values) v *= c;
  return f;
}

}  // namespace

TEST_CASE("multiplier vanishes without adjoint or below the smoothing window") {
  auto ctx = unit_context(6);
  const Assembler& a = ctx->assembler();
  StateSolver s(ctx, kParams);
  const auto y = s.solve_regularized(analytic_field(ctx->dofs_ptr(), "vortex", 10.0), kDelta, {});
  CHECK(compute_multiplier(a, y.velocity, FeField::zeros(ctx->dofs_ptr(), Role::adjoint), kParams.g, kDelta).l2_norm() ==
        0.0);
  const auto small = s.solve_regularized(analytic_field(ctx->dofs_ptr(), "vortex", 0.5), kDelta, {});
  std::mt19937_64 rng(2);
  Eigen::VectorXd pc = random_direction(a, rng).coefficients();
  a.zero_dirichlet(pc);
  const FeField p(ctx->dofs_ptr(), Role::adjoint, pc);
  CHECK(compute_multiplier(a, small.velocity, p, kParams.g, kDelta).l2_norm() == 0.0);
  // Jacobian bound carried through the Nemytskii operator.
  const auto lam = compute_multiplier(a, y.velocity, p, kParams.g, kDelta);
  CHECK(lam.l2_norm() > 0.0);
  CHECK(lam.l2_norm() <= 3.0 * a.strain_norm(pc));
}

TEST_CASE("region classification") {
  auto ctx = unit_context(4);
  const Assembler& a = ctx->assembler();
  const double band = reporting_band(kParams.g);
  const auto zero = classify_sets(a, FeField::zeros(ctx->dofs_ptr(), Role::velocity), kParams.g, band);
  CHECK(zero.measure_below == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(zero.band_points == 0);
  const auto twice = classify_sets(a, affine_field(ctx->dofs_ptr(), 2.0 * kParams.g), kParams.g, band);
  CHECK(twice.measure_above == doctest::Approx(1.0).epsilon(1e-12));
  const auto at = classify_sets(a, affine_field(ctx->dofs_ptr(), kParams.g), kParams.g, band);
  CHECK(at.band_points == static_cast<int>(at.region.size()));
  CHECK_THROWS_AS(classify_sets(a, FeField::zeros(ctx->dofs_ptr(), Role::velocity), kParams.g, 0.0), ParameterError);

  StateSolver s(ctx, kParams);
  const auto y = s.solve_nonsmooth(analytic_field(ctx->dofs_ptr(), "vortex", 10.0), {});
  const auto m = classify_sets(a, y.velocity, kParams.g, band);
  CHECK(std::abs(m.measure_below + m.measure_band + m.measure_above - a.domain_area()) <= 1e-10);
}

TEST_CASE("sign statistics detect both signs on the band") {
  auto ctx = unit_context(4);
  const Assembler& a = ctx->assembler();
  const FeField y = affine_field(ctx->dofs_ptr(), kParams.g);
  const auto masks = classify_sets(a, y, kParams.g, reporting_band(kParams.g));
  // check_strong_stationarity only reads eps y, so the control-role field is fine here.
  const FeField yv = y;
  const auto none = check_strong_stationarity(a, yv, scaled_strain(a, y, 0.0), masks, kParams.g);
  CHECK(none.max == 0.0);
  CHECK(none.violating_fraction == 0.0);
  const auto neg = check_strong_stationarity(a, yv, scaled_strain(a, y, -1.0), masks, kParams.g);
  CHECK(neg.max == doctest::Approx(-kParams.g * kParams.g).epsilon(1e-10));
  CHECK(neg.violating_fraction == 0.0);
  const auto pos = check_strong_stationarity(a, yv, scaled_strain(a, y, 1.0), masks, kParams.g);
  CHECK(pos.violating_fraction == doctest::Approx(1.0));
  CHECK_FALSE(pos.vacuous);
  const auto empty = classify_sets(a, FeField::zeros(ctx->dofs_ptr(), Role::velocity), kParams.g, 1e-3);
  CHECK(check_strong_stationarity(a, yv, scaled_strain(a, y, 1.0), empty, kParams.g).vacuous);
}

TEST_CASE("trivial stationary point has zero weak residuals") {
  auto ctx = unit_context(4);
  ControlProblem pb = benchmark_problem(ctx->dofs_ptr(), 0.0);
  const auto dofs = ctx->dofs_ptr();
  const FeField y = FeField::zeros(dofs, Role::velocity);
  const FeField p = FeField::zeros(dofs, Role::adjoint);
  const FeField u = FeField::zeros(dofs, Role::control);
  const auto lam = compute_multiplier(ctx->assembler(), y, p, pb.params.g, kDelta);
  const auto masks = classify_sets(ctx->assembler(), y, pb.params.g, reporting_band(pb.params.g));
  const auto w = check_weak_stationarity(*ctx, u, y, p, lam, pb, masks);
  CHECK(w.adjoint == 0.0);
  CHECK(w.gradient == 0.0);
  CHECK(w.inactive_lambda == 0.0);
  CHECK(w.above_lambda == 0.0);
  CHECK(w.state == 0.0);
}

TEST_CASE("Stokes regime: multiplier vanishes and probes are linear") {
  auto ctx = unit_context(6);
  const Assembler& a = ctx->assembler();
  ControlProblem pb = benchmark_problem(ctx->dofs_ptr(), 1.0);
  pb.params.g = 1e6;
  const RegParam delta{0.1};
  const auto r = optimize_regularized(ctx, pb, delta, pb.u_bar, {}, GradientMode::original);
  REQUIRE(r.converged);
  CertifyConfig cfg;
  cfg.num_probes = 4;
  const auto rep = certify(ctx, pb, r.u, r.state.velocity, r.adjoint.p, delta, cfg);
  CHECK(rep.regions.measure_below == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.weak.inactive_lambda == 0.0);
  CHECK(rep.weak.adjoint_scaled < 1e-10);
  CHECK(rep.weak.gradient <= r.tol_grad);
  CHECK(rep.sign.vacuous);

  std::mt19937_64 rng(4);
  const FeField h = random_direction(a, rng);
  const FeField mh(ctx->dofs_ptr(), Role::control, -h.coefficients());
  const auto probes = check_b_stationarity(ctx, r.u, pb, {h, mh, FeField::zeros(ctx->dofs_ptr(), Role::control)}, {},
                                           {}, rep.tol_b);
  CHECK(std::abs(probes[0].value) <= rep.tol_b);
  CHECK(std::abs(probes[0].value + probes[1].value) <= 1e-14);
  CHECK(probes[2].value == 0.0);
  for (const auto& p : probes) CHECK_FALSE(p.flagged);
}

TEST_CASE("random directions are seeded, smooth and normalized") {
  auto ctx = unit_context(4);
  const Assembler& a = ctx->assembler();
  std::mt19937_64 r1(99), r2(99);
  const FeField h1 = random_direction(a, r1);
  const FeField h2 = random_direction(a, r2);
  CHECK((h1.coefficients() - h2.coefficients()).norm() == 0.0);
  CHECK(a.l2_norm(h1.coefficients()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((random_direction(a, r1).coefficients() - h1.coefficients()).norm() > 0.1);
}

TEST_CASE("multiplier recovery on the plastic region improves along the path") {
  auto ctx = unit_context(8);
  const Assembler& a = ctx->assembler();
  const ControlProblem pb = benchmark_problem(ctx->dofs_ptr(), 1.0);
  const auto path = delta_path(ctx, pb, scaled_schedule(pb.params.g, {1e-1, 1e-2, 1e-3}), {});
  REQUIRE(path.complete);
  std::vector<double> above;
  for (std::size_t k = 0; k < path.stages.size(); ++k) {
    const auto& st = path.stages[k];
    const RegParam delta{path.table[k].delta};
    const auto lam = compute_multiplier(a, st.state.velocity, st.adjoint.p, pb.params.g, delta);
    const auto masks = classify_sets(a, st.state.velocity, pb.params.g, reporting_band(pb.params.g));
    const auto w = check_weak_stationarity(*ctx, st.u, st.state.velocity, st.adjoint.p, lam, pb, masks);
    MESSAGE("delta=" << delta.delta << " above=" << w.above_lambda << " inactive=" << w.inactive_lambda
                     << " adjoint=" << w.adjoint_scaled);
    above.push_back(w.above_lambda);
    CHECK(w.adjoint_scaled <= 1e-10);
  }
  for (std::size_t k = 1; k < above.size(); ++k) CHECK(above[k] <= above[k - 1]);
}
