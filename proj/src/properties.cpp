#include "shear/properties.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace shear {

void PropertySuiteConfig::validate() const {
  if (samples < 1) throw ParameterError("property suite: samples must be >= 1");
  detail::require_threshold(g);
  if (delta_factors.empty()) throw ParameterError("property suite: delta_factors must be nonempty");
  for (double f : delta_factors) RegParam{f * g}.validate(g);
  if (!(kink_distance > 0.0)) throw ParameterError("property suite: kink_distance must be > 0");
}

namespace {

template <int N>
SymTensor<N> gaussian(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::Matrix<double, N, N> a;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) a(i, j) = nd(rng);
  }
  return SymTensor<N>(a);
}

/// Mixture that concentrates samples near the kink |E| = g, where the
/// properties are hardest to satisfy.
template <int N>
SymTensor<N> sample_tensor(std::mt19937_64& rng, double g, double delta) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  SymTensor<N> e = gaussian<N>(rng);
  const double pick = uni(rng);
  double r;
  if (pick < 0.25) {
    r = g * 3.0 * uni(rng);
  } else if (pick < 0.75) {
    r = g + delta * (2.0 * uni(rng) - 1.0) * 1.5;
  } else if (pick < 0.95) {
    r = g + (uni(rng) < 0.5 ? -1.0 : 1.0) * delta * (1.0 + 1e-9 * uni(rng));
  } else {
    r = g * 50.0 * uni(rng);
  }
  r = std::max(r, 0.0);
  const double n = e.norm();
  return n > 0.0 ? (r / n) * e : e;
}

/// Operator norm of H -> a H + b (n : H) n with |n| = 1: max(|a|, |a + b|).
double tangent_norm(double a, double b) { return std::max(std::abs(a), std::abs(a + b)); }

template <int N>
PropertyDimension run_dimension(const PropertySuiteConfig& cfg, std::mt19937_64& rng) {
  PropertyDimension out;
  out.dim = N;
  out.samples = cfg.samples;
  const double g = cfg.g;
  std::uniform_real_distribution<double> logu(std::log(1e-4), std::log(0.99));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  out.monotone_min = out.monotone_smoothed_min = out.jacobian_psd_min = 1e300;
  out.lipschitz_excess = -1e300;
  for (long i = 0; i < cfg.samples; ++i) {
    const RegParam delta{g * std::exp(logu(rng))};
    const SymTensor<N> e = sample_tensor<N>(rng, g, delta.delta);
    // D either independent or a small perturbation of E.
    SymTensor<N> d = uni(rng) < 0.5 ? sample_tensor<N>(rng, g, delta.delta)
                                    : e + (delta.delta * uni(rng)) * gaussian<N>(rng);
    const SymTensor<N> h = gaussian<N>(rng);
    const SymTensor<N> k = gaussian<N>(rng);

    const SymTensor<N> me = shear_excess(e, g), md = shear_excess(d, g);
    out.monotone_min = std::min(out.monotone_min, contract(me - md, e - d));
    out.lipschitz_excess = std::max(out.lipschitz_excess, (me - md).norm() - (e - d).norm());

    const SymTensor<N> se = smoothed_shear_excess(e, g, delta), sd = smoothed_shear_excess(d, g, delta);
    out.monotone_smoothed_min = std::min(out.monotone_smoothed_min, contract(se - sd, e - d));

    const SymTensor<N> jh = smoothed_shear_excess_jacobian(e, h, g, delta);
    const SymTensor<N> jk = smoothed_shear_excess_jacobian(e, k, g, delta);
    out.jacobian_psd_min = std::min(out.jacobian_psd_min, contract(jh, h));
    out.jacobian_bound = std::max(out.jacobian_bound, jh.norm() / h.norm());
    const double sym_scale = 1.0 + jh.norm() * k.norm() + jk.norm() * h.norm();
    out.symmetry_defect = std::max(out.symmetry_defect, std::abs(contract(jh, k) - contract(jk, h)) / sym_scale);

    if (std::abs(e.norm() - g) > delta.delta) {
      ++out.exact_region_samples;
      out.exactness_defect = std::max(out.exactness_defect, (se - me).norm());
    }

    const double c = std::exp(4.0 * uni(rng) - 2.0);
    const SymTensor<N> dh = shear_excess_dir(e, h, g);
    const SymTensor<N> dch = shear_excess_dir(e, c * h, g);
    out.homogeneity_defect = std::max(out.homogeneity_defect, (dch - c * dh).norm() / (c * h.norm()));
  }
  return out;
}

template <int N>
void run_consistency(const PropertySuiteConfig& cfg, std::mt19937_64& rng, std::vector<ConsistencyLevel>& levels) {
  const double g = cfg.g;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const long n = std::max<long>(cfg.samples / 10, 1);
  for (auto& lv : levels) {
    const RegParam delta{lv.delta};
    for (long i = 0; i < n; ++i) {
      // Radii spread over [0, 3 g], with a share inside the smoothing window.
      const double r = uni(rng) < 0.5 ? g + lv.delta * (2.0 * uni(rng) - 1.0) : 3.0 * g * uni(rng);
      SymTensor<N> e = gaussian<N>(rng);
      e = (r / e.norm()) * e;
      lv.max_gap = std::max(lv.max_gap, (smoothed_shear_excess(e, g, delta) - shear_excess(e, g)).norm());
      const double rn = e.norm();
      if (std::abs(rn - g) < cfg.kink_distance) continue;
      ++lv.off_kink_samples;
      // Both maps are a H + b (n : H) n with n = E / |E|; compare coefficients.
      double a_reg = 0.0, b_reg = 0.0;
      if (rn - g > -lv.delta) {
        const RadialProfile p = smoothed_radial_profile(rn - g, lv.delta);
        a_reg = p.phi / rn;
        b_reg = p.dphi - p.phi / rn;
      }
      double a_dir = 0.0, b_dir = 0.0;
      if (rn > g) {
        a_dir = 1.0 - g / rn;
        b_dir = g / rn;
      }
      lv.jacobian_sup_error = std::max(lv.jacobian_sup_error, tangent_norm(a_reg - a_dir, b_reg - b_dir));
    }
  }
}

}  // namespace

PropertyReport run_property_suite(const PropertySuiteConfig& cfg) {
  cfg.validate();
  PropertyReport rep;
  std::mt19937_64 rng(cfg.seed);
  rep.dims.push_back(run_dimension<2>(cfg, rng));
  rep.dims.push_back(run_dimension<3>(cfg, rng));
  for (double f : cfg.delta_factors) rep.consistency.push_back({f * cfg.g, 0.0, 0.0, 0.0, 0});
  run_consistency<2>(cfg, rng, rep.consistency);
  run_consistency<3>(cfg, rng, rep.consistency);
  double num = 0.0, den = 0.0;
  for (auto& lv : rep.consistency) {
    lv.ratio = lv.max_gap / lv.delta;
    num += lv.max_gap * lv.delta;
    den += lv.delta * lv.delta;
  }
  rep.fitted_k = num / den;
  rep.min_k = rep.consistency.empty() ? 0.0 : rep.consistency.front().ratio;
  for (const auto& lv : rep.consistency) {
    rep.sup_k = std::max(rep.sup_k, lv.ratio);
    rep.min_k = std::min(rep.min_k, lv.ratio);
  }
  return rep;
}

PropertyVerdict judge_properties(const PropertyReport& r) {
  PropertyVerdict v;
  const double tol = r.tol_num;
  v.monotone = v.lipschitz = v.jacobian_psd = v.jacobian_bound = v.exactness = v.symmetry = v.homogeneity =
      !r.dims.empty();
  for (const auto& d : r.dims) {
    v.monotone = v.monotone && d.monotone_min >= -tol && d.monotone_smoothed_min >= -tol;
    v.lipschitz = v.lipschitz && d.lipschitz_excess <= 1e-12;
    v.jacobian_psd = v.jacobian_psd && d.jacobian_psd_min >= -tol;
    v.jacobian_bound = v.jacobian_bound && d.jacobian_bound <= 3.0;
    v.exactness = v.exactness && d.exactness_defect == 0.0 && d.exact_region_samples > 0;
    v.symmetry = v.symmetry && d.symmetry_defect <= tol;
    v.homogeneity = v.homogeneity && d.homogeneity_defect <= tol;
  }
  v.gap_linear = !r.consistency.empty() && r.sup_k <= 1.1 * r.min_k;
  for (const auto& hi : r.consistency) {
    for (const auto& lo : r.consistency) {
      if (std::abs(hi.delta - 10.0 * lo.delta) > 1e-12 * hi.delta) continue;
      DecayPair p{hi.delta, lo.delta, hi.jacobian_sup_error, lo.jacobian_sup_error, false};
      p.pass = p.error_tenth <= std::max(p.error / 5.0, tol);
      v.decay.push_back(p);
    }
  }
  v.jacobian_decay = !v.decay.empty();
  for (const auto& p : v.decay) v.jacobian_decay = v.jacobian_decay && p.pass;
  return v;
}

}  // namespace shear
