#pragma once

#include <cstdint>
#include <vector>

#include "shear/tensor.hpp"

namespace shear {

struct PropertySuiteConfig {
  long samples = 100000;  // per dimension (2x2 and 3x3)
  std::uint64_t seed = 42;
  double g = 0.5;
  /// Regularization widths, as multiples of g, for the consistency ladders.
  std::vector<double> delta_factors{0.8, 0.4, 0.08, 0.04, 0.008, 0.0008};
  double kink_distance = 0.1;  // off-kink set ||E| - g| >= kink_distance

  void validate() const;
};

/// Worst observed value of each sampled property; the sign convention is
/// "larger is worse" for *_excess and "smaller is worse" for *_min.
struct PropertyDimension {
  int dim = 0;
  long samples = 0;
  double monotone_min = 0.0;            // (m(E) - m(D)) : (E - D)
  double monotone_smoothed_min = 0.0;   // same for m_delta
  double lipschitz_excess = 0.0;        // |m(E) - m(D)| - |E - D|
  double jacobian_psd_min = 0.0;        // (m_delta'(E) H) : H
  double jacobian_bound = 0.0;          // |m_delta'(E) H| / |H|
  double symmetry_defect = 0.0;         // |(J H) : K - (J K) : H|
  double exactness_defect = 0.0;        // |m_delta(E) - m(E)| where ||E| - g| > delta
  double homogeneity_defect = 0.0;      // |m'(E; cH) - c m'(E; H)| / (c |H|)
  long exact_region_samples = 0;
};

/// Per-delta consistency data over the sampled E.
struct ConsistencyLevel {
  double delta = 0.0;
  double max_gap = 0.0;            // sup |m_delta(E) - m(E)|
  double ratio = 0.0;              // max_gap / delta
  double jacobian_sup_error = 0.0; // sup over off-kink E of the operator norm of m_delta'(E) - m'(E; .)
  long off_kink_samples = 0;
};

struct PropertyReport {
  std::vector<PropertyDimension> dims;
  std::vector<ConsistencyLevel> consistency;
  double fitted_k = 0.0;  // least-squares K in max_gap ~ K delta
  double sup_k = 0.0;     // largest max_gap / delta, so max_gap <= sup_k delta on every level
  double min_k = 0.0;     // smallest max_gap / delta
  double tol_num = 1e-10;
};

PropertyReport run_property_suite(const PropertySuiteConfig& cfg);

/// A pair of consistency levels whose widths differ by 10x.
struct DecayPair {
  double delta = 0.0;
  double delta_tenth = 0.0;
  double error = 0.0;
  double error_tenth = 0.0;
  bool pass = false;
};

/// Pass/fail verdicts with the shipped tolerances. Errors at or below
/// tol_num count as converged, so a ladder that reaches the roundoff floor
/// passes the decay test.
struct PropertyVerdict {
  bool monotone = false;         // m and m_delta, >= -tol_num
  bool lipschitz = false;        // excess <= 1e-12
  bool jacobian_psd = false;     // >= -tol_num
  bool jacobian_bound = false;   // <= 3
  bool exactness = false;        // == 0
  bool symmetry = false;         // <= tol_num
  bool homogeneity = false;      // <= tol_num
  bool gap_linear = false;       // sup_k <= 1.1 min_k
  bool jacobian_decay = false;   // error_tenth <= max(error / 5, tol_num) for every pair
  std::vector<DecayPair> decay;

  bool tensor_ok() const {
    return monotone && lipschitz && jacobian_psd && jacobian_bound && exactness && symmetry && homogeneity;
  }
  bool consistency_ok() const { return gap_linear && jacobian_decay; }
};

PropertyVerdict judge_properties(const PropertyReport& report);

}  // namespace shear
