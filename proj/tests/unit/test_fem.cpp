#include <doctest.h>

#include <cmath>
#include <random>

#include "mms.hpp"
#include "shear/assembly.hpp"
#include "shear/errors.hpp"
#include "shear/saddle.hpp"
#include "test_util.hpp"

using namespace shear;

namespace {

std::shared_ptr<const Discretization> unit_disc(int n, int order = 4) {
  return make_discretization(Mesh::structured(n, n), order);
}

Eigen::VectorXd random_velocity(const Assembler& a, std::mt19937_64& rng, bool constrained) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(a.num_velocity());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = nd(rng);
  if (constrained) a.zero_dirichlet(v);
  return v;
}

double max_abs_diff(const SparseMatrix& a, const SparseMatrix& b) {
  return Eigen::MatrixXd(a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("dof map dimensions and Dirichlet mask") {
  const auto disc = unit_disc(4);
  const DofMap& d = disc->dofs();
  const Mesh& m = d.mesh();
  CHECK(d.num_velocity() == 2 * static_cast<int>(m.num_vertices() + m.num_edges()));
  CHECK(d.num_pressure() == static_cast<int>(m.num_vertices()));
  int masked = 0;
  for (int i = 0; i < d.num_velocity(); ++i) {
    if (!d.is_dirichlet(i)) continue;
    ++masked;
    const Point p = d.node_point(i / 2);
    CHECK((p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0));
  }
  // 2 components x (boundary vertices + boundary edge midpoints)
  CHECK(masked == 2 * (16 + 16));
}

TEST_CASE("quadrature weights sum to the domain area") {
  const auto disc = make_discretization(Mesh::structured(5, 3, Rect{0, 0, 2, 1}), 4);
  double s = 0.0;
  for (double w : disc->weights()) {
    CHECK(w > 0.0);
    s += w;
  }
  CHECK(std::abs(s - 2.0) < 1e-12 * 2.0);
}

TEST_CASE("symmetric gradient of affine fields") {
  const auto disc = unit_disc(3);
  auto dofs = disc->dofs_ptr();
  Eigen::Matrix2d skew;
  skew << 0.0, -1.3, 1.3, 0.0;
  const FeField rot = interpolate(dofs, Role::control, [&](double x, double y) -> Eigen::Vector2d {
    return skew * Eigen::Vector2d(x, y);
  });
  // control role carries boundary values; evaluate through the kernel directly
  for (const auto& e : kernels::sym_gradient(*disc, rot.coefficients())) CHECK(e.norm() < 1e-13);
  Eigen::Matrix2d sym;
  sym << 0.4, -0.2, -0.2, 1.1;
  const FeField lin = interpolate(dofs, Role::control, [&](double x, double y) -> Eigen::Vector2d {
    return sym * Eigen::Vector2d(x, y);
  });
  for (const auto& e : kernels::sym_gradient(*disc, lin.coefficients())) {
    CHECK((e.matrix() - sym).norm() < 1e-13);
  }
  CHECK_THROWS_AS(eval_sym_gradient(FeField::zeros(dofs, Role::pressure), disc), ShapeError);
}

TEST_CASE("strain energy from quadrature matches the assembled quadratic form") {
  const auto disc = unit_disc(4);
  const Assembler a(disc);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXd v = random_velocity(a, rng, false);
    const auto eps = a.strain(v);
    double q = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) q += disc->weight(i) * eps[i].squared_norm();
    CHECK(std::abs(q - v.dot(a.ops().strain * v)) < 1e-10 * (1.0 + q));
  }
}

TEST_CASE("Stokes operator is symmetric and coercive on the reduced space") {
  const auto disc = unit_disc(4);
  const Assembler a(disc);
  const auto st = assemble_stokes(a, 1.0);
  CHECK(max_abs_diff(st.velocity, SparseMatrix(st.velocity.transpose())) <= 1e-12);
  std::mt19937_64 rng(12);
  for (int k = 0; k < 5; ++k) {
    const Eigen::VectorXd v = random_velocity(a, rng, true);
    CHECK(v.dot(st.velocity * v) > 0.0);
  }
  CHECK_THROWS_AS(assemble_stokes(a, 0.0), ParameterError);
}

TEST_CASE("parallel kernels agree bitwise with the serial reference") {
  const auto disc = unit_disc(6);
  const Assembler par(disc, Exec::parallel);
  const Assembler ser(disc, Exec::serial);
  std::mt19937_64 rng(13);
  const Eigen::VectorXd v = random_velocity(par, rng, false);
  const auto ep = par.strain(v);
  const auto es = ser.strain(v);
  bool same = true;
  for (std::size_t i = 0; i < ep.size(); ++i) same = same && (ep[i].matrix() == es[i].matrix());
  CHECK(same);
  CHECK((par.nonlinear_term(ep, 0.5, std::nullopt) - ser.nonlinear_term(es, 0.5, std::nullopt)).cwiseAbs().maxCoeff() == 0.0);
  std::vector<PointTangent> tg(ep.size());
  for (std::size_t i = 0; i < ep.size(); ++i) tg[i] = tangents::regularized(ep[i], 0.5, RegParam{0.1});
  const SparseMatrix tp = par.tangent_matrix(tg);
  const SparseMatrix ts = ser.tangent_matrix(tg);
  CHECK(Eigen::Map<const Eigen::VectorXd>(tp.valuePtr(), tp.nonZeros()) ==
        Eigen::Map<const Eigen::VectorXd>(ts.valuePtr(), ts.nonZeros()));
}

TEST_CASE("nonlinear residual examples") {
  const auto disc = unit_disc(4);
  const Assembler a(disc);
  auto dofs = disc->dofs_ptr();
  const PlasticityParams params{0.5, 1.0, 1.0};
  const FeField y0 = FeField::zeros(dofs, Role::velocity);
  const FeField p0 = FeField::zeros(dofs, Role::pressure);
  const FeField u0 = FeField::zeros(dofs, Role::control);
  CHECK(assemble_nonlinear_residual(a, y0, p0, u0, params, std::nullopt).norm() == 0.0);

  std::mt19937_64 rng(14);
  const FeField y(dofs, Role::velocity, 0.1 * random_velocity(a, rng, true));
  const FeField u(dofs, Role::control, random_velocity(a, rng, false));
  PlasticityParams huge = params;
  huge.g = 1e6;
  Eigen::VectorXd stokes(a.num_velocity() + a.num_pressure());
  stokes.head(a.num_velocity()) = a.ops().strain * y.coefficients() - a.ops().mass * u.coefficients();
  stokes.tail(a.num_pressure()) = a.ops().divergence * y.coefficients();
  a.zero_dirichlet_rows(stokes);
  CHECK((assemble_nonlinear_residual(a, y, p0, u, huge, std::nullopt) - stokes).norm() < 1e-12 * stokes.norm());

  // Exactness of the regularization away from the kink: choose g far from all |eps y|.
  const auto eps = a.strain(y.coefficients());
  std::vector<double> r;
  for (const auto& e : eps) r.push_back(e.norm());
  std::sort(r.begin(), r.end());
  const double gmid = 0.5 * (r[r.size() / 2] + r[r.size() / 2 + 1]);
  const double gap = std::min(gmid - r[r.size() / 2], r[r.size() / 2 + 1] - gmid);
  PlasticityParams mid = params;
  mid.g = gmid;
  const RegParam delta{0.5 * gap};
  const auto rn = assemble_nonlinear_residual(a, y, p0, u, mid, std::nullopt);
  const auto rd = assemble_nonlinear_residual(a, y, p0, u, mid, delta);
  CHECK((rn - rd).norm() <= 1e-14 * rn.norm());
}

TEST_CASE("regularized Jacobian: symmetry, Stokes limit and difference oracle") {
  const auto disc = unit_disc(4);
  const Assembler a(disc);
  auto dofs = disc->dofs_ptr();
  std::mt19937_64 rng(15);
  const PlasticityParams params{0.5, 1.0, 1.0};
  const RegParam delta{0.1};
  const Eigen::VectorXd yv = 0.3 * random_velocity(a, rng, true);
  const FeField y(dofs, Role::velocity, yv);
  const SparseMatrix j = assemble_jacobian(a, y, params, delta);
  CHECK(max_abs_diff(j, SparseMatrix(j.transpose())) <= 1e-10);

  PlasticityParams huge = params;
  huge.g = 1e6;
  CHECK(max_abs_diff(assemble_jacobian(a, y, huge, delta), assemble_stokes(a, 1.0).velocity) == 0.0);

  const Eigen::VectorXd w = random_velocity(a, rng, true);
  const Eigen::VectorXd p = Eigen::VectorXd::Zero(a.num_pressure());
  const Eigen::VectorXd u = Eigen::VectorXd::Zero(a.num_velocity());
  Eigen::VectorXd jw = j * w;
  a.zero_dirichlet(jw);
  auto fd_err = [&](double t) {
    const Eigen::VectorXd dr = (a.residual(yv + t * w, p, u, params, delta) - a.residual(yv, p, u, params, delta)) / t;
    return (dr.head(a.num_velocity()) - jw).norm();
  };
  const double e1 = fd_err(1e-4), e2 = fd_err(1e-5);
  CHECK(e2 < 1e-3 * jw.norm());
  CHECK(e2 / e1 < 0.2);
}

TEST_CASE("quadrature orders 4 and 6 agree on smooth fields") {
  const auto d4 = unit_disc(8, 4);
  const auto d6 = std::make_shared<const Discretization>(d4->dofs_ptr(), 6);
  const Assembler a4(d4), a6(d6);
  auto dofs = d4->dofs_ptr();
  const FeField y = interpolate(dofs, Role::velocity, [](double x, double y) -> Eigen::Vector2d {
    return 20.0 * testing::mms_velocity(x, y);
  });
  const Eigen::VectorXd p = Eigen::VectorXd::Zero(a4.num_pressure());
  const Eigen::VectorXd u = Eigen::VectorXd::Zero(a4.num_velocity());
  const PlasticityParams huge{1e6, 1.0, 1.0};
  const double n4 = a4.residual(y.coefficients(), p, u, huge, std::nullopt).norm();
  const double n6 = a6.residual(y.coefficients(), p, u, huge, std::nullopt).norm();
  CHECK(std::abs(n4 - n6) < 1e-8);
}

TEST_CASE("manufactured Stokes solution converges at optimal rates") {
  const double mu = 1.0;
  double prev_u = 0.0, prev_p = 0.0;
  for (int n : {4, 8, 16}) {
    const auto disc = unit_disc(n);
    const Assembler a(disc);
    SaddleSolver solver(a);
    solver.factorize(assemble_stokes(a, mu).velocity);
    const Eigen::VectorXd f = load_vector(*disc, [&](double x, double y) { return testing::mms_force(x, y, mu); });
    const auto sol = solver.solve(f);
    const double eu = velocity_l2_error(*disc, sol.velocity, testing::mms_velocity);
    const double ep = pressure_l2_error(*disc, sol.pressure, testing::mms_pressure);
    if (prev_u > 0.0) {
      CHECK(std::log2(prev_u / eu) > 2.7);
      CHECK(std::log2(prev_p / ep) > 1.8);
    }
    prev_u = eu;
    prev_p = ep;
    // Divergence control of the mixed solution.
    Eigen::VectorXd dv = a.ops().divergence * sol.velocity;
    CHECK(dv.norm() < 1e-10 * (1.0 + a.strain_norm(sol.velocity)));
  }
}

TEST_CASE("dual norm of a Stokes residual vanishes and is positive otherwise") {
  const auto disc = unit_disc(6);
  const Assembler a(disc);
  const DualNorm dual(a);
  std::mt19937_64 rng(16);
  Eigen::VectorXd r = random_velocity(a, rng, true);
  CHECK(dual(r) > 0.0);
  // A pure pressure-gradient functional B^T q is annihilated on solenoidal test functions.
  Eigen::VectorXd q(a.num_pressure());
  for (Eigen::Index i = 0; i < q.size(); ++i) q(i) = std::sin(static_cast<double>(i));
  Eigen::VectorXd g = a.ops().divergence.transpose() * q;
  a.zero_dirichlet(g);
  CHECK(dual(g) < 1e-10 * g.norm());
}
