#include <doctest.h>

#include <cmath>
#include <random>

#include "shear/tensor.hpp"
#include "test_util.hpp"

using namespace shear;
using shear::testing::random_sym;
using shear::testing::random_sym_with_norm;

namespace {

constexpr double kG = 0.5;

template <int N>
double dist(const SymTensor<N>& a, const SymTensor<N>& b) {
  return (a - b).norm();
}

// Central difference of a tensor map along h.
template <int N, class F>
SymTensor<N> central_diff(F&& f, const SymTensor<N>& e, const SymTensor<N>& h, double t) {
  return (1.0 / (2.0 * t)) * (f(e + t * h) - f(e - t * h));
}

}  // namespace

TEST_CASE("SymTensor symmetrizes at construction") {
  Eigen::Matrix2d a;
  a << 1.0, 2.0, 4.0, 3.0;
  const SymTensor2 s(a);
  CHECK(s(0, 1) == s(1, 0));
  CHECK(s(0, 1) == doctest::Approx(3.0));
  CHECK(contract(s, s) == doctest::Approx(s.squared_norm()));
}

TEST_CASE("shear_excess on the three radial regimes") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const auto e = random_sym_with_norm<2>(rng, kG * 0.999);
    CHECK(shear_excess(e, kG).norm() == 0.0);
  }
  CHECK(shear_excess(SymTensor2::zero(), kG).norm() == 0.0);
  const auto u = random_sym_with_norm<3>(rng, 1.0);
  const auto m = shear_excess(2.0 * kG * u, kG);
  CHECK(dist(m, kG * u) < 1e-15);
  CHECK_THROWS_AS(shear_excess(u, 0.0), ParameterError);
  CHECK_THROWS_AS(shear_excess(u, -1.0), ParameterError);
}

TEST_CASE("shear_excess_dir matches the three cases") {
  std::mt19937_64 rng(2);
  const auto h = random_sym<2>(rng);
  const auto inside = random_sym_with_norm<2>(rng, 0.7 * kG);
  CHECK(shear_excess_dir(inside, h, kG).norm() == 0.0);

  const auto on = random_sym_with_norm<2>(rng, kG);
  const SymTensor2 h_neg = contract(on, h) < 0.0 ? h : -h;
  CHECK(shear_excess_dir(on, h_neg, kG).norm() == 0.0);
  const SymTensor2 h_pos = -h_neg;
  const auto kink = shear_excess_dir(on, h_pos, kG);
  CHECK(dist(kink, (contract(on, h_pos) / (kG * kG)) * on) < 1e-15);

  const auto u = random_sym_with_norm<2>(rng, 1.0);
  CHECK(dist(shear_excess_dir(2.0 * kG * u, u, kG), u) < 1e-14);
}

TEST_CASE("shear_excess_dir agrees with one-sided difference quotients at first order") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> radius(0.0, 3.0 * kG);
  int tested = 0;
  while (tested < 200) {
    const double r = radius(rng);
    if (std::abs(r - kG) <= 0.1) continue;
    ++tested;
    const auto e = random_sym_with_norm<3>(rng, r);
    const auto h = random_sym<3>(rng);
    const auto d = shear_excess_dir(e, h, kG);
    auto err = [&](double t) {
      return dist((1.0 / t) * (shear_excess(e + t * h, kG) - shear_excess(e, kG)), d);
    };
    const double e1 = err(1e-4), e2 = err(1e-5);
    CHECK(e2 <= 1e-3 * (1.0 + d.norm()));
    if (e1 > 1e-9) CHECK(e2 / e1 < 0.2);  // O(t)
  }
}

TEST_CASE("kink directional derivative is the one-sided limit") {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 50; ++k) {
    const auto e = random_sym_with_norm<2>(rng, kG);
    const auto h = random_sym<2>(rng);
    const auto d = shear_excess_dir(e, h, kG);
    const double t = 1e-7;
    const auto fd = (1.0 / t) * (shear_excess(e + t * h, kG) - shear_excess(e, kG));
    CHECK(dist(fd, d) < 1e-5 * (1.0 + h.squared_norm()));
  }
}

TEST_CASE("shear_excess_dir is positively homogeneous in the direction") {
  std::mt19937_64 rng(5);
  const double radii[] = {0.3 * kG, kG, 2.0 * kG};
  for (double r : radii) {
    for (int k = 0; k < 20; ++k) {
      const auto e = random_sym_with_norm<3>(rng, r);
      const auto h = random_sym<3>(rng);
      const double c = 0.1 + 3.0 * static_cast<double>(k) / 20.0;
      CHECK(dist(shear_excess_dir(e, c * h, kG), c * shear_excess_dir(e, h, kG)) < 1e-13);
    }
  }
}

TEST_CASE("smoothed_max branch values") {
  const double d = 0.07;
  auto sm = smoothed_max(d, d);
  CHECK(sm.value == doctest::Approx(d).epsilon(1e-14));
  CHECK(sm.slope == doctest::Approx(1.0).epsilon(1e-14));
  sm = smoothed_max(-d, d);
  CHECK(std::abs(sm.value) < 1e-16);
  CHECK(std::abs(sm.slope) < 1e-15);
  sm = smoothed_max(0.0, d);
  CHECK(sm.value == doctest::Approx(3.0 * d / 16.0).epsilon(1e-14));
  CHECK(sm.slope == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(smoothed_max(0.0, 0.0), ParameterError);
}

TEST_CASE("smoothed_max value is the antiderivative of its slope") {
  // Composite Simpson on the slope from -delta reproduces the value.
  const double d = 0.2;
  for (double x = -d; x <= d + 1e-12; x += d / 7.0) {
    const int n = 200;
    const double hstep = (x + d) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      s += w * smoothed_max(-d + i * hstep, d).slope;
    }
    s *= hstep / 3.0;
    CHECK(smoothed_max(x, d).value == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("smoothed_shear_excess examples") {
  std::mt19937_64 rng(6);
  const RegParam delta{0.05};
  const auto low = random_sym_with_norm<2>(rng, kG - delta.delta);
  CHECK(smoothed_shear_excess(low, kG, delta).norm() == 0.0);
  const auto high = random_sym_with_norm<2>(rng, kG + delta.delta + 1e-9);
  CHECK(dist(smoothed_shear_excess(high, kG, delta), shear_excess(high, kG)) < 1e-15);
  const auto on = random_sym_with_norm<3>(rng, kG);
  CHECK(dist(smoothed_shear_excess(on, kG, delta), (3.0 * delta.delta / 32.0 / kG) * on) < 1e-15);
  CHECK_THROWS_AS(smoothed_shear_excess(on, kG, RegParam{kG}), ParameterError);
  CHECK_THROWS_AS(smoothed_shear_excess(on, kG, RegParam{0.0}), ParameterError);
}

TEST_CASE("smoothed_shear_excess_jacobian matches central differences and is self-adjoint") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> radius(0.0, 2.0 * kG);
  std::uniform_real_distribution<double> width(0.01, 0.45);
  for (int k = 0; k < 300; ++k) {
    const RegParam delta{width(rng)};
    const auto e = random_sym_with_norm<2>(rng, radius(rng));
    const auto h = random_sym<2>(rng);
    const auto kk = random_sym<2>(rng);
    const auto j = smoothed_shear_excess_jacobian(e, h, kG, delta);
    auto f = [&](const SymTensor2& x) { return smoothed_shear_excess(x, kG, delta); };
    const auto fd = central_diff<2>(f, e, h, 1e-6);
    CHECK(dist(fd, j) < 1e-6 * (1.0 + h.norm()));
    const double lhs = contract(j, kk);
    const double rhs = contract(smoothed_shear_excess_jacobian(e, kk, kG, delta), h);
    CHECK(std::abs(lhs - rhs) < 1e-13 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("smoothed_shear_excess_jacobian forward differences converge at first order") {
  std::mt19937_64 rng(8);
  const RegParam delta{0.1};
  for (int k = 0; k < 50; ++k) {
    const auto e = random_sym_with_norm<3>(rng, kG + 0.03 * (k % 5 - 2));
    const auto h = random_sym<3>(rng);
    const auto j = smoothed_shear_excess_jacobian(e, h, kG, delta);
    auto err = [&](double t) {
      return dist((1.0 / t) * (smoothed_shear_excess(e + t * h, kG, delta) -
                               smoothed_shear_excess(e, kG, delta)),
                  j);
    };
    const double e1 = err(1e-3), e2 = err(1e-4);
    if (e1 > 1e-10) CHECK(e2 / e1 < 0.2);
  }
}

TEST_CASE("generalized Jacobian coincides with the directional derivative off the kink") {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 100; ++k) {
    const double r = (k % 2 == 0) ? 0.5 * kG : 1.7 * kG;
    const auto e = random_sym_with_norm<2>(rng, r);
    const auto h = random_sym<2>(rng);
    CHECK(dist(shear_excess_generalized_jacobian(e, h, kG), shear_excess_dir(e, h, kG)) < 1e-15);
  }
}

TEST_CASE("monotonicity, nonexpansiveness and Jacobian bounds on random samples") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> scale(0.0, 3.0);
  std::uniform_real_distribution<double> width(1e-4, 0.49);
  double worst_mono = 0.0, worst_lip = 0.0, worst_psd = 0.0, worst_bound = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const RegParam delta{width(rng)};
    const auto e = random_sym<3>(rng, scale(rng));
    const auto d = random_sym<3>(rng, scale(rng));
    const auto h = random_sym<3>(rng);
    worst_mono = std::min(worst_mono, contract(shear_excess(e, kG) - shear_excess(d, kG), e - d));
    worst_mono = std::min(worst_mono, contract(smoothed_shear_excess(e, kG, delta) -
                                                   smoothed_shear_excess(d, kG, delta),
                                               e - d));
    worst_lip = std::max(worst_lip, dist(shear_excess(e, kG), shear_excess(d, kG)) - dist(e, d));
    const auto j = smoothed_shear_excess_jacobian(e, h, kG, delta);
    worst_psd = std::min(worst_psd, contract(j, h));
    worst_bound = std::max(worst_bound, j.norm() / h.norm());
  }
  CHECK(worst_mono >= -1e-10);
  CHECK(worst_lip <= 1e-12);
  CHECK(worst_psd >= -1e-10);
  CHECK(worst_bound <= 3.0);
}

TEST_CASE("radial profile derivative bound") {
  // phi' attains its maximum inside the smoothing window; it is scale-free in delta.
  double sup = 0.0;
  for (int i = -1000; i <= 1000; ++i) {
    sup = std::max(sup, smoothed_radial_profile(i / 1000.0, 1.0).dphi);
  }
  CHECK(sup > 1.0);
  CHECK(sup < 1.75);
}
