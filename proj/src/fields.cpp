#include "shear/fields.hpp"

#include <cmath>
#include <sstream>

#include "shear/errors.hpp"

namespace shear {

FeField::FeField(std::shared_ptr<const DofMap> dofs, Role role, Eigen::VectorXd coefficients)
    : dofs_(std::move(dofs)), role_(role), c_(std::move(coefficients)) {
  if (!dofs_) throw ShapeError("FeField requires a dof map");
  if (c_.size() != dofs_->size(role_)) {
    std::ostringstream os;
    os << role_name(role_) << " field expects " << dofs_->size(role_) << " coefficients, got "
       << c_.size();
    throw ShapeError(os.str());
  }
  if (DofMap::constrained(role_)) {
    for (Eigen::Index i = 0; i < c_.size(); ++i) {
      if (dofs_->is_dirichlet(static_cast<int>(i)) && c_(i) != 0.0) {
        std::ostringstream os;
        os << role_name(role_) << " field is nonzero on Dirichlet dof " << i;
        throw ShapeError(os.str());
      }
    }
  }
}

FeField FeField::zeros(std::shared_ptr<const DofMap> dofs, Role role) {
  const int n = dofs->size(role);
  return FeField(std::move(dofs), role, Eigen::VectorXd::Zero(n));
}

void require_field(const FeField& f, const DofMap& dofs, std::initializer_list<Role> roles,
                   const char* what) {
  bool ok = false;
  for (Role r : roles) ok = ok || f.role() == r;
  if (!ok) {
    std::ostringstream os;
    os << what << ": unexpected field role " << role_name(f.role());
    throw ShapeError(os.str());
  }
  if (&f.dofs() != &dofs && (f.dofs().num_nodes() != dofs.num_nodes() ||
                             f.dofs().num_pressure() != dofs.num_pressure())) {
    std::ostringstream os;
    os << what << ": field lives on a different dof map";
    throw ShapeError(os.str());
  }
}

double QuadTensorField::l2_norm() const {
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) s += weight(k) * values[k].squared_norm();
  return std::sqrt(s);
}

}  // namespace shear
