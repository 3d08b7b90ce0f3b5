#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "shear/sensitivity.hpp"

using namespace shear;
using namespace shear::testing;

namespace {

const PlasticityParams kParams{0.5, 1.0, 1.0};

Eigen::VectorXd random_velocity(const Assembler& a, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(a.num_velocity());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = nd(rng);
  a.zero_dirichlet(v);
  return v;
}

struct Plastic {
  std::shared_ptr<SolverContext> ctx;
  FeField u;
  StateSolution y;
};

Plastic plastic_state(int n) {
  auto ctx = unit_context(n);
  FeField u = analytic_field(ctx->dofs_ptr(), "vortex", 10.0);
  StateSolver s(ctx, kParams);
  StateSolution y = s.solve_nonsmooth(u, {});
  return {ctx, u, std::move(y)};
}

}  // namespace

TEST_CASE("zero direction gives the zero derivative") {
  auto p = plastic_state(6);
  Sensitivity sens(p.ctx, kParams);
  const auto z = sens.solve_linearized(p.y.velocity, FeField::zeros(p.ctx->dofs_ptr(), Role::control), {});
  CHECK(z.iterations == 0);
  CHECK(z.z.coefficients().lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("below the threshold the derivative is the Stokes solve") {
  auto ctx = unit_context(6);
  const Assembler& a = ctx->assembler();
  const PlasticityParams params{1e6, 2.0, 1.0};
  StateSolver s(ctx, params);
  const FeField u = analytic_field(ctx->dofs_ptr(), "vortex", 10.0);
  const auto y = s.solve_nonsmooth(u, {});
  std::mt19937_64 rng(3);
  const FeField h = random_direction(a, rng);
  Sensitivity sens(ctx, params);
  const auto z = sens.solve_linearized(y.velocity, h, {});
  const auto stokes = s.solve_stokes(h);
  CHECK((z.z.coefficients() - stokes.velocity.coefficients()).norm() < 1e-12);
  CHECK(z.band_points == 0);
}

TEST_CASE("linearized solution is positively homogeneous in the direction") {
  auto p = plastic_state(8);
  const Assembler& a = p.ctx->assembler();
  Sensitivity sens(p.ctx, kParams);
  std::mt19937_64 rng(5);
  const FeField h = random_direction(a, rng);
  LinearizedConfig cfg;
  cfg.band_tol = 0.05 * kParams.g;  // wide band, so the kink branch is exercised
  const auto z1 = sens.solve_linearized(p.y.velocity, h, cfg);
  CHECK(z1.band_points > 0);
  const double c = 3.7;
  const auto zc = sens.solve_linearized(p.y.velocity, FeField(a.dofs_ptr(), Role::control, c * h.coefficients()), cfg);
  CHECK(a.h1_norm(zc.z.coefficients() - c * z1.z.coefficients()) <= 1e-9 * a.h1_norm(zc.z.coefficients()));
}

TEST_CASE("one-sided derivative differs between h and -h on a nonempty band") {
  auto p = plastic_state(8);
  const Assembler& a = p.ctx->assembler();
  Sensitivity sens(p.ctx, kParams);
  std::mt19937_64 rng(9);
  const FeField h = random_direction(a, rng);
  const FeField mh(a.dofs_ptr(), Role::control, -h.coefficients());
  LinearizedConfig wide;
  wide.band_tol = 0.05 * kParams.g;
  const auto zp = sens.solve_linearized(p.y.velocity, h, wide);
  const auto zm = sens.solve_linearized(p.y.velocity, mh, wide);
  CHECK(a.h1_norm(zp.z.coefficients() + zm.z.coefficients()) > 1e-6 * a.h1_norm(zp.z.coefficients()));
  // Residual of each solution under its own operator.
  for (const auto* z : {&zp, &zm}) CHECK(z->residual <= wide.tol_residual * (1.0 + 10.0));
}

TEST_CASE("linearized operator is strongly monotone with the discrete Korn constant") {
  auto p = plastic_state(6);
  const Assembler& a = p.ctx->assembler();
  Sensitivity sens(p.ctx, kParams);
  const double korn = p.ctx->korn_constant();
  std::mt19937_64 rng(13);
  for (double band : {1e-6 * kParams.g, 0.05 * kParams.g}) {
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd z = random_velocity(a, rng);
      const Eigen::VectorXd w = random_velocity(a, rng);
      const double lhs = (sens.apply_operator(p.y.velocity, z, band) - sens.apply_operator(p.y.velocity, w, band)).dot(z - w);
      CHECK(lhs >= kParams.mu * korn * std::pow(a.h1_norm(z - w), 2) * (1.0 - 1e-10));
    }
  }
}

TEST_CASE("difference quotients of the state converge to the linearized solution") {
  auto p = plastic_state(8);
  const Assembler& a = p.ctx->assembler();
  Sensitivity sens(p.ctx, kParams);
  std::mt19937_64 rng(17);
  const FeField h = random_direction(a, rng);
  SolverConfig scfg;
  scfg.tol_residual = 1e-13;
  const auto rep = sens.derivative_check(p.u, h, {1e-2, 1e-3, 1e-4, 1e-5}, scfg, {});
  for (std::size_t k = 0; k < rep.t.size(); ++k) {
    MESSAGE("t=" << rep.t[k] << " r+=" << rep.r_plus[k] << " r-=" << rep.r_minus[k]);
  }
  MESSAGE("band=" << rep.band_points << " order+=" << rep.order_plus << " order-=" << rep.order_minus
                  << " asym=" << rep.asymmetry);
  for (std::size_t k = 1; k < rep.t.size(); ++k) {
    CHECK(rep.r_plus[k] < rep.r_plus[k - 1]);
    CHECK(rep.r_minus[k] < rep.r_minus[k - 1]);
  }
  CHECK(rep.r_plus.back() <= 1e-3 * rep.z_norm_plus);
  CHECK(rep.r_minus.back() <= 1e-3 * rep.z_norm_minus);
  if (rep.band_points == 0) {
    CHECK(rep.order_plus >= 0.9);
    CHECK(rep.order_minus >= 0.9);
    CHECK(rep.asymmetry <= 1e-9 * rep.z_norm_plus);
  }
}

TEST_CASE("zero direction gives zero difference-quotient error") {
  auto p = plastic_state(4);
  Sensitivity sens(p.ctx, kParams);
  const auto rep = sens.derivative_check(p.u, FeField::zeros(p.ctx->dofs_ptr(), Role::control), {1e-2, 1e-3}, {}, {});
  for (double r : rep.r_plus) CHECK(r == 0.0);
  CHECK_THROWS_AS(sens.derivative_check(p.u, p.u, {1e-3, 1e-2}, {}, {}), ParameterError);
}
