#include "shear/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "shear/errors.hpp"

namespace shear {

namespace {

// Orbit of (a, a, 1 - 2a) under vertex permutations.
void add_orbit3(std::vector<QuadPoint>& q, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  q.push_back({a, a, 0.5 * w});
  q.push_back({b, a, 0.5 * w});
  q.push_back({a, b, 0.5 * w});
}

// Orbit of (a, b, c) with distinct entries.
void add_orbit6(std::vector<QuadPoint>& q, double a, double b, double w) {
  const double c = 1.0 - a - b;
  const double p[6][2] = {{a, b}, {b, a}, {a, c}, {c, a}, {b, c}, {c, b}};
  for (const auto& pt : p) q.push_back({pt[0], pt[1], 0.5 * w});
}

// Gauss-Legendre nodes and weights on [0, 1] by Newton on P_n.
void gauss_legendre01(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(static_cast<std::size_t>(n));
  w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = 0.5 * (1.0 - z);
    w[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

// Collapsed (Duffy) tensor rule, exact to degree 2n - 2 on the triangle.
std::vector<QuadPoint> collapsed_rule(int n) {
  std::vector<double> x, w;
  gauss_legendre01(n + 1, x, w);  // one extra node absorbs the Jacobian factor
  std::vector<QuadPoint> q;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double s = x[i], t = x[j];
      q.push_back({s * (1.0 - t), t, w[i] * w[j] * (1.0 - t)});
    }
  }
  return q;
}

}  // namespace

std::vector<QuadPoint> triangle_rule(int order) {
  if (order < 1) throw ParameterError("quadrature order must be >= 1");
  std::vector<QuadPoint> q;
  if (order <= 2) {
    add_orbit3(q, 1.0 / 6.0, 1.0 / 3.0);
  } else if (order <= 4) {
    add_orbit3(q, 0.445948490915965, 0.223381589678011);
    add_orbit3(q, 0.091576213509771, 0.109951743655322);
  } else if (order <= 6) {
    add_orbit3(q, 0.249286745170910, 0.116786275726379);
    add_orbit3(q, 0.063089014491502, 0.050844906370207);
    add_orbit6(q, 0.053145049844817, 0.310352451033784, 0.082851075618374);
  } else {
    q = collapsed_rule((order + 2) / 2);
  }
  return q;
}

}  // namespace shear
