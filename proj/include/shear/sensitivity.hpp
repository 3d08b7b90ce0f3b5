#pragma once

#include <vector>

#include "shear/state_solver.hpp"

namespace shear {

struct LinearizedConfig {
  double tol_residual = 1e-12;  // relative to 1 + ||M h||
  int max_iters = 200;
  double damping = 0.7;
  /// Kink band half-width; negative selects the default 1e-6 g.
  double band_tol = -1.0;

  double band(double g) const { return band_tol < 0.0 ? 1e-6 * g : band_tol; }
  void validate() const;
};

struct LinearizedSolution {
  FeField z;
  FeField pressure;
  double residual = 0.0;
  int iterations = 0;
  int band_points = 0;
  double band_fraction = 0.0;  // share of quadrature weight in the kink band
  std::vector<IterationRecord> history;
};

struct DerivativeCheckReport {
  std::vector<double> t;
  std::vector<double> r_plus;   // direction +h
  std::vector<double> r_minus;  // direction -h
  double z_norm_plus = 0.0;     // H1 norms of the linearized solutions
  double z_norm_minus = 0.0;
  double order_plus = 0.0;      // least-squares slope of log r against log t
  double order_minus = 0.0;
  int band_points = 0;
  double band_fraction = 0.0;
  /// ||z(h) + z(-h)||_{H1}; zero exactly when the derivative is linear along h.
  double asymmetry = 0.0;
};

/// Directional derivative S'(u; h) of the nonsmooth solution operator via the
/// linearized equation
///   mu (eps z, eps v) + nu (m'(eps y; eps z), eps v) - (pi, div v) = (h, v).
class Sensitivity {
 public:
  Sensitivity(std::shared_ptr<SolverContext> ctx, PlasticityParams params);

  /// y must solve the nonsmooth state equation; h is a control-space load.
  LinearizedSolution solve_linearized(const FeField& y, const FeField& h, const LinearizedConfig& cfg);

  /// Velocity part of the linearized operator applied to z at state y.
  Eigen::VectorXd apply_operator(const FeField& y, const Eigen::VectorXd& z, double band_tol) const;

  /// r(t) = ||(S(u + t h) - S(u)) / t - S'(u; h)||_{H1} for both signs of h.
  DerivativeCheckReport derivative_check(const FeField& u, const FeField& h, const std::vector<double>& t_seq,
                                         const SolverConfig& state_cfg, const LinearizedConfig& lin_cfg);

 private:
  std::shared_ptr<SolverContext> ctx_;
  PlasticityParams params_;
};

/// Least-squares slope of log r against log t over entries with r > 0.
double fitted_order(const std::vector<double>& t, const std::vector<double>& r);

}  // namespace shear
