#pragma once

#include <Eigen/Core>

#include <memory>
#include <vector>

#include "shear/discretization.hpp"
#include "shear/tensor.hpp"

namespace shear {

/// Coefficient vector over a dof map, tagged with its role. Roles with
/// homogeneous Dirichlet data are checked to vanish on the boundary.
class FeField {
 public:
  /// Empty placeholder; only assignment and empty() are meaningful.
  FeField() = default;
  FeField(std::shared_ptr<const DofMap> dofs, Role role, Eigen::VectorXd coefficients);
  static FeField zeros(std::shared_ptr<const DofMap> dofs, Role role);

  Role role() const { return role_; }
  const DofMap& dofs() const { return *dofs_; }
  std::shared_ptr<const DofMap> dofs_ptr() const { return dofs_; }
  const Eigen::VectorXd& coefficients() const { return c_; }
  Eigen::Index size() const { return c_.size(); }
  bool empty() const { return !dofs_; }

  /// Same coefficients under another role; re-validates the boundary invariant.
  FeField as(Role role) const { return FeField(dofs_, role, c_); }

 private:
  std::shared_ptr<const DofMap> dofs_;
  Role role_ = Role::velocity;
  Eigen::VectorXd c_;
};

/// Throws ShapeError unless the field has the expected role and a matching dof map.
void require_field(const FeField& f, const DofMap& dofs, std::initializer_list<Role> roles,
                   const char* what);

/// Nodal interpolant of a vector function, zeroed on Dirichlet dofs when
/// the role is constrained.
template <class F>
FeField interpolate(std::shared_ptr<const DofMap> dofs, Role role, F&& fn) {
  Eigen::VectorXd c(dofs->num_velocity());
  for (int n = 0; n < dofs->num_nodes(); ++n) {
    const Point p = dofs->node_point(n);
    const Eigen::Vector2d v = fn(p.x, p.y);
    c(2 * n) = v(0);
    c(2 * n + 1) = v(1);
  }
  if (DofMap::constrained(role)) {
    for (int i = 0; i < c.size(); ++i) {
      if (dofs->is_dirichlet(i)) c(i) = 0.0;
    }
  }
  return FeField(std::move(dofs), role, std::move(c));
}

/// One SymTensor2 per quadrature point, with the quadrature weights of the
/// discretization that produced it.
struct QuadTensorField {
  std::vector<SymTensor2> values;
  std::shared_ptr<const Discretization> disc;

  std::size_t size() const { return values.size(); }
  double weight(std::size_t qp) const { return disc->weight(qp); }
  /// (integral of |T|^2 over Omega)^(1/2)
  double l2_norm() const;
};

}  // namespace shear
