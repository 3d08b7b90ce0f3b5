#pragma once

#include <string>
#include <vector>

#include "shear/control.hpp"

namespace shear {

/// Named analytic control-space fields used for targets and fixed loads.
///   zero:    0
///   vortex:  a (sin^2(pi x) sin(2 pi y), -sin(2 pi x) sin^2(pi y)), divergence free
///   uniform: a (1, 0)
///   shear:   a (sin(pi y), 0)
FeField analytic_field(std::shared_ptr<const DofMap> dofs, const std::string& name, double amplitude);
const std::vector<std::string>& analytic_field_names();

/// The shipped benchmark: mu = nu = 1, g = 0.5, alpha = 1e-2, vortex target
/// of the given amplitude, zero anchor.
ControlProblem benchmark_problem(std::shared_ptr<const DofMap> dofs, double amplitude = 1.0);

/// delta_k = factor_k * g.
PathSchedule scaled_schedule(double g, const std::vector<double>& factors);

}  // namespace shear
