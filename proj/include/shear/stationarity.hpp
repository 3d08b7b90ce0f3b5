#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "shear/control.hpp"
#include "shear/sensitivity.hpp"

namespace shear {

/// lambda_delta = m_delta'(eps y)^* eps p at every quadrature point (no nu factor).
QuadTensorField compute_multiplier(const Assembler& a, const FeField& y, const FeField& p, double g, RegParam delta);

enum class Region : std::uint8_t { below, band, above };

struct RegionMasks {
  std::vector<Region> region;  // per quadrature point
  double band_tol = 0.0;
  double measure_below = 0.0;
  double measure_band = 0.0;
  double measure_above = 0.0;
  int band_points = 0;
};

/// below: |eps y| < g - eps_A; band: ||eps y| - g| <= eps_A; above: |eps y| > g + eps_A.
/// y may also carry the control role (no boundary condition).
RegionMasks classify_sets(const Assembler& a, const FeField& y, double g, double band_tol);

/// Default reporting band half-width.
inline double reporting_band(double g) { return 1e-3 * g; }

struct WeakResiduals {
  // Absolute values.
  double adjoint = 0.0;           // dual norm of mu (eps p, eps v) + nu (lambda, eps v) - (y - z_d, v)
  double gradient = 0.0;          // ||alpha u + p||_{L2}
  double gradient_proximal = 0.0; // ||p + (alpha + 1) u - u_bar||_{L2}
  double inactive_lambda = 0.0;   // ||lambda||_{L2(below)}
  double above_lambda = 0.0;      // ||lambda - m'(eps y) eps p||_{L2(above)}
  double state = 0.0;             // dual norm of the nonsmooth state residual at (y, u)
  // Relative to the natural scale of each equation.
  double adjoint_scaled = 0.0;
  double gradient_scaled = 0.0;
  double inactive_lambda_scaled = 0.0;
  double above_lambda_scaled = 0.0;
  double state_scaled = 0.0;
};

struct SignStatistics {
  int band_points = 0;
  double band_measure = 0.0;
  double max = 0.0;               // of lambda : eps y over band points (0 if empty)
  double mean = 0.0;              // measure-weighted
  double violating_fraction = 0.0;  // measure share with lambda : eps y > tol_sign
  double tol_sign = 0.0;
  bool vacuous = true;            // band is empty
};

struct BProbe {
  int id = 0;
  double value = 0.0;  // j'(u; h)
  bool flagged = false;
  bool skipped = false;
  std::string error;
};

struct StationarityReport {
  double g = 0.0;
  double band_tol = 0.0;
  double delta = 0.0;
  double j_value = 0.0;        // original objective at (S(u), u)
  double state_gap = 0.0;      // ||S(u) - y||_{H1} between nonsmooth and final regularized state
  RegionMasks regions;
  WeakResiduals weak;
  SignStatistics sign;
  std::vector<BProbe> probes;
  double probe_band = 0.0;     // kink band of the linearized solves behind the probes
  double tol_b = 0.0;
  double min_probe = 0.0;
};

WeakResiduals check_weak_stationarity(SolverContext& ctx, const FeField& u, const FeField& y, const FeField& p,
                                      const QuadTensorField& lambda, const ControlProblem& problem,
                                      const RegionMasks& masks);

/// Sign statistics of lambda : eps y on the band points of masks.
SignStatistics check_strong_stationarity(const Assembler& a, const FeField& y, const QuadTensorField& lambda,
                                         const RegionMasks& masks, double g);

/// Probes j'(u; h) = (S(u) - z_d, S'(u; h)) + alpha (u, h) for each direction.
std::vector<BProbe> check_b_stationarity(std::shared_ptr<SolverContext> ctx, const FeField& u,
                                         const ControlProblem& problem, const std::vector<FeField>& directions,
                                         const SolverConfig& state_cfg, const LinearizedConfig& lin_cfg,
                                         double tol_b, StateSolution* state_out = nullptr);

/// Smooth random control: sine modes up to `modes` per axis with Gaussian
/// coefficients, normalized to unit L2 norm.
FeField random_direction(const Assembler& a, std::mt19937_64& rng, int modes = 3);

struct CertifyConfig {
  double band_tol = -1.0;  // negative selects reporting_band(g)
  int num_probes = 16;
  std::uint64_t seed = 42;
  SolverConfig state;
  /// A negative band_tol selects max(1e-6 g, delta) for the probes.
  LinearizedConfig linearized;
};

/// Full certification at a final path stage (u, y_delta, p_delta, delta).
StationarityReport certify(std::shared_ptr<SolverContext> ctx, const ControlProblem& problem, const FeField& u,
                           const FeField& y, const FeField& p, RegParam delta, const CertifyConfig& cfg);

}  // namespace shear
