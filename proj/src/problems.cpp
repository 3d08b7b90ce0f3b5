#include "shear/problems.hpp"

#include <cmath>
#include <numbers>

namespace shear {

const std::vector<std::string>& analytic_field_names() {
  static const std::vector<std::string> names{"zero", "vortex", "uniform", "shear"};
  return names;
}

FeField analytic_field(std::shared_ptr<const DofMap> dofs, const std::string& name, double amplitude) {
  constexpr double pi = std::numbers::pi;
  const double a = amplitude;
  if (name == "zero") return FeField::zeros(std::move(dofs), Role::control);
  if (name == "vortex") {
    return interpolate(std::move(dofs), Role::control, [a](double x, double y) -> Eigen::Vector2d {
      const double sx = std::sin(pi * x), sy = std::sin(pi * y);
      return a * Eigen::Vector2d(sx * sx * std::sin(2 * pi * y), -std::sin(2 * pi * x) * sy * sy);
    });
  }
  if (name == "uniform") {
    return interpolate(std::move(dofs), Role::control, [a](double, double) -> Eigen::Vector2d { return {a, 0.0}; });
  }
  if (name == "shear") {
    return interpolate(std::move(dofs), Role::control,
                       [a](double, double y) -> Eigen::Vector2d { return {a * std::sin(pi * y), 0.0}; });
  }
  throw ParameterError("unknown analytic field '" + name + "' (expected zero, vortex, uniform or shear)");
}

ControlProblem benchmark_problem(std::shared_ptr<const DofMap> dofs, double amplitude) {
  ControlProblem p;
  p.params = {0.5, 1.0, 1.0};
  p.alpha = 1e-2;
  p.z_d = analytic_field(dofs, "vortex", amplitude);
  p.u_bar = FeField::zeros(std::move(dofs), Role::control);
  return p;
}

PathSchedule scaled_schedule(double g, const std::vector<double>& factors) {
  PathSchedule s;
  for (double f : factors) s.deltas.push_back(f * g);
  return s;
}

}  // namespace shear
