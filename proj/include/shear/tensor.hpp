#pragma once

// Pointwise tensor calculus for the shear-thickening nonlinearity.
//
// The nonlinearity acting on a strain-rate tensor E is
//
//   excess(E) = max(0, |E| - g) E / |E|,     excess(0) = 0,
//
// i.e. the residual of the Frobenius projection of E onto the ball of
// radius g. Its C^1 regularization replaces max(0, .) by a quartic
// smoothing of width delta and multiplies by the smoothed indicator.

#include <Eigen/Core>

#include <cmath>
#include <sstream>

#include "shear/errors.hpp"

namespace shear {

/// Symmetric N x N tensor. Symmetrized at construction.
template <int N>
class SymTensor {
  static_assert(N == 2 || N == 3, "SymTensor supports N = 2 or 3");

 public:
  using Matrix = Eigen::Matrix<double, N, N>;

  SymTensor() : a_(Matrix::Zero()) {}
  explicit SymTensor(const Matrix& a) : a_(0.5 * (a + a.transpose())) {}

  static SymTensor zero() { return SymTensor(); }
  static SymTensor identity() { return SymTensor(Matrix::Identity()); }

  static constexpr int dim() { return N; }
  const Matrix& matrix() const { return a_; }
  double operator()(int i, int j) const { return a_(i, j); }

  double norm() const { return a_.norm(); }
  double squared_norm() const { return a_.squaredNorm(); }

  SymTensor& operator+=(const SymTensor& o) {
    a_ += o.a_;
    return *this;
  }
  SymTensor& operator-=(const SymTensor& o) {
    a_ -= o.a_;
    return *this;
  }
  SymTensor& operator*=(double s) {
    a_ *= s;
    return *this;
  }

  friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
  friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
  friend SymTensor operator-(SymTensor a) { return a *= -1.0; }
  friend SymTensor operator*(double s, SymTensor a) { return a *= s; }
  friend SymTensor operator*(SymTensor a, double s) { return a *= s; }

  /// Frobenius inner product a : b.
  friend double contract(const SymTensor& a, const SymTensor& b) {
    return (a.a_.array() * b.a_.array()).sum();
  }

 private:
  Matrix a_;
};

using SymTensor2 = SymTensor<2>;
using SymTensor3 = SymTensor<3>;

/// Yield threshold g, viscosity mu and weight nu of the nonsmooth term.
struct PlasticityParams {
  double g = 0.5;
  double mu = 1.0;
  double nu = 1.0;

  void validate() const {
    if (!(g > 0.0) || !(mu > 0.0) || !(nu > 0.0) || !std::isfinite(g) ||
        !std::isfinite(mu) || !std::isfinite(nu)) {
      std::ostringstream os;
      os << "plasticity parameters must be finite and positive (g=" << g << ", mu=" << mu
         << ", nu=" << nu << ")";
      throw ParameterError(os.str());
    }
  }
};

/// Regularization width delta; admissible only for 0 < delta < g.
struct RegParam {
  double delta = 0.0;

  void validate(double g) const {
    if (!(delta > 0.0) || !(delta < g)) {
      std::ostringstream os;
      os << "regularization requires 0 < delta < g (delta=" << delta << ", g=" << g << ")";
      throw ParameterError(os.str());
    }
  }
};

namespace detail {
inline void require_threshold(double g) {
  if (!(g > 0.0) || !std::isfinite(g)) {
    std::ostringstream os;
    os << "threshold g must be finite and positive (g=" << g << ")";
    throw ParameterError(os.str());
  }
}
}  // namespace detail

/// Default tolerance for the kink test ||E| - g| <= tol.
inline double kink_tolerance(double g) { return 1e-12 * g; }

/// max(0, |E| - g) E / |E| with the convention excess(0) = 0.
template <int N>
SymTensor<N> shear_excess(const SymTensor<N>& e, double g) {
  detail::require_threshold(g);
  const double r = e.norm();
  if (r <= g) return SymTensor<N>::zero();
  return ((r - g) / r) * e;
}

/// One-sided directional derivative of shear_excess at E in direction H.
/// The kink |E| = g is detected with absolute tolerance tol_eq.
template <int N>
SymTensor<N> shear_excess_dir(const SymTensor<N>& e, const SymTensor<N>& h, double g,
                              double tol_eq) {
  detail::require_threshold(g);
  const double r = e.norm();
  if (std::abs(r - g) <= tol_eq) {
    const double eh = contract(e, h);
    if (eh <= 0.0) return SymTensor<N>::zero();
    return (eh / (g * g)) * e;
  }
  if (r < g) return SymTensor<N>::zero();
  const double eh = contract(e, h);
  return (1.0 - g / r) * h + (g * eh / (r * r * r)) * e;
}

template <int N>
SymTensor<N> shear_excess_dir(const SymTensor<N>& e, const SymTensor<N>& h, double g) {
  return shear_excess_dir(e, h, g, kink_tolerance(g));
}

struct SmoothedMax {
  double value = 0.0;
  double slope = 0.0;
};

/// Quartic C^2 smoothing of max(0, x) on |x| <= delta, and its derivative.
inline SmoothedMax smoothed_max(double x, double delta) {
  if (!(delta > 0.0)) throw ParameterError("smoothed_max requires delta > 0");
  if (x > delta) return {x, 1.0};
  if (x < -delta) return {0.0, 0.0};
  const double d3 = delta * delta * delta;
  const double x2 = x * x;
  const double value = -x2 * x2 / (16.0 * d3) + 3.0 * x2 / (8.0 * delta) + 0.5 * x + 3.0 * delta / 16.0;
  const double slope = -x2 * x / (4.0 * d3) + 3.0 * x / (4.0 * delta) + 0.5;
  return {value, slope};
}

/// Radial profile phi(s) = max_delta(0, s) * 1_delta(s) and its derivative, s = |E| - g.
struct RadialProfile {
  double phi = 0.0;
  double dphi = 0.0;
};

inline RadialProfile smoothed_radial_profile(double s, double delta) {
  const SmoothedMax sm = smoothed_max(s, delta);
  double curvature = 0.0;  // d/ds of the smoothed indicator
  if (std::abs(s) <= delta) {
    curvature = -3.0 * s * s / (4.0 * delta * delta * delta) + 3.0 / (4.0 * delta);
  }
  return {sm.value * sm.slope, sm.slope * sm.slope + sm.value * curvature};
}

/// C^1 regularization of shear_excess, exact where ||E| - g| > delta.
template <int N>
SymTensor<N> smoothed_shear_excess(const SymTensor<N>& e, double g, RegParam delta) {
  detail::require_threshold(g);
  delta.validate(g);
  const double r = e.norm();
  const double s = r - g;
  if (s <= -delta.delta) return SymTensor<N>::zero();
  const SmoothedMax sm = smoothed_max(s, delta.delta);
  return ((sm.value * sm.slope) / r) * e;
}

/// Jacobian of smoothed_shear_excess at E applied to H. The map H -> J(E) H
/// is self-adjoint with respect to ':', so this is also the adjoint action.
template <int N>
SymTensor<N> smoothed_shear_excess_jacobian(const SymTensor<N>& e, const SymTensor<N>& h,
                                            double g, RegParam delta) {
  detail::require_threshold(g);
  delta.validate(g);
  const double r = e.norm();
  const double s = r - g;
  if (s <= -delta.delta) return SymTensor<N>::zero();
  const RadialProfile p = smoothed_radial_profile(s, delta.delta);
  const double eh = contract(e, h) / r;  // unit-direction component
  return (p.phi / r) * h + ((p.dphi - p.phi / r) * eh / r) * e;
}

/// Generalized (Clarke) Jacobian element of shear_excess used for
/// semismooth Newton: the differentiable branch off the kink, zero on it.
template <int N>
SymTensor<N> shear_excess_generalized_jacobian(const SymTensor<N>& e, const SymTensor<N>& h,
                                               double g) {
  const double r = e.norm();
  if (r <= g) return SymTensor<N>::zero();
  const double eh = contract(e, h);
  return (1.0 - g / r) * h + (g * eh / (r * r * r)) * e;
}

}  // namespace shear
