#pragma once

#include <memory>
#include <random>

#include "shear/problems.hpp"
#include "shear/stationarity.hpp"

namespace shear::testing {

inline std::shared_ptr<SolverContext> unit_context(int n) { return SolverContext::create(Mesh::structured(n, n)); }

/// Smooth random control with L2 norm `scale`.
inline FeField random_control(const Assembler& a, std::mt19937_64& rng, double scale) {
  const FeField h = random_direction(a, rng);
  return FeField(a.dofs_ptr(), Role::control, scale * h.coefficients());
}

/// L2 norm of m_delta(eps) - m(eps) over the quadrature points.
inline double regularization_gap(const Assembler& a, const std::vector<SymTensor2>& eps, double g, RegParam delta) {
  double s = 0.0;
  for (std::size_t q = 0; q < eps.size(); ++q) {
    s += a.disc().weight(q) * (smoothed_shear_excess(eps[q], g, delta) - shear_excess(eps[q], g)).squared_norm();
  }
  return std::sqrt(s);
}

}  // namespace shear::testing
