#include "shear/errors.hpp"
#include "shear/kernels.hpp"

namespace shear::reference {

std::vector<SymTensor2> sym_gradient(const Discretization& disc, const Eigen::VectorXd& v) {
  if (v.size() != disc.dofs().num_velocity()) throw ShapeError("velocity vector size mismatch");
  std::vector<SymTensor2> out(disc.num_points());
  const auto nq = static_cast<std::size_t>(disc.points_per_element());
  for (std::size_t t = 0; t < disc.num_elements(); ++t) {
    detail::element_sym_gradient(disc, t, v, &out[t * nq]);
  }
  return out;
}

Eigen::VectorXd integrate_stress(const Discretization& disc, const std::vector<SymTensor2>& sigma) {
  if (sigma.size() != disc.num_points()) throw ShapeError("integrate_stress: quadrature size mismatch");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(disc.dofs().num_velocity());
  for (std::size_t t = 0; t < disc.num_elements(); ++t) {
    double buf[12];
    detail::element_stress(disc, t, sigma, buf);
    const auto dofs = disc.dofs().element_velocity_dofs(t);
    for (int i = 0; i < 12; ++i) f(dofs[static_cast<std::size_t>(i)]) += buf[i];
  }
  return f;
}

void assemble_tangent(const Discretization& disc, const ScatterMap& map,
                      const std::vector<PointTangent>& tangent, double* values) {
  if (tangent.size() != disc.num_points()) throw ShapeError("assemble_tangent: quadrature size mismatch");
  for (std::size_t t = 0; t < disc.num_elements(); ++t) {
    double buf[144];
    detail::element_tangent(disc, t, tangent, buf);
    for (int k = 0; k < 144; ++k) {
      const int s = map.slots[t * 144 + static_cast<std::size_t>(k)];
      if (s >= 0) values[s] += buf[k];
    }
  }
}

}  // namespace shear::reference
