#pragma once

// Element-level kernels. Each comes in a parallel flavour (OpenMP over
// elements, local results buffered and scattered serially in element order)
// and a serial reference flavour. Both perform identical floating-point
// operations in identical order, so results agree bitwise.

#include <Eigen/Core>

#include <vector>

#include "shear/discretization.hpp"
#include "shear/tensor.hpp"

namespace shear {

enum class Exec { serial, parallel };

/// Linear pointwise map H -> a H + b (n : H) n at one quadrature point.
struct PointTangent {
  double a = 0.0;
  double b = 0.0;
  SymTensor2 n;
};

/// Maps a local (element, i, j) entry to its slot in a CSR/CSC value array.
struct ScatterMap {
  int dofs_per_element = 0;
  std::vector<int> global_dofs;  // num_elements * dofs_per_element
  std::vector<int> slots;        // num_elements * dofs_per_element^2, or -1
};

namespace kernels {

/// Symmetric gradient of a velocity-space coefficient vector at every quadrature point.
std::vector<SymTensor2> sym_gradient(const Discretization& disc, const Eigen::VectorXd& v,
                                     Exec exec = Exec::parallel);

/// Global vector with entries sum_qp w sigma : eps(phi_i) over velocity dofs.
Eigen::VectorXd integrate_stress(const Discretization& disc, const std::vector<SymTensor2>& sigma,
                                 Exec exec = Exec::parallel);

/// Adds sum_qp w T_qp(eps phi_j) : eps phi_i into values[] through the scatter map.
void assemble_tangent(const Discretization& disc, const ScatterMap& map,
                      const std::vector<PointTangent>& tangent, double* values,
                      Exec exec = Exec::parallel);

}  // namespace kernels

namespace reference {

std::vector<SymTensor2> sym_gradient(const Discretization& disc, const Eigen::VectorXd& v);
Eigen::VectorXd integrate_stress(const Discretization& disc, const std::vector<SymTensor2>& sigma);
void assemble_tangent(const Discretization& disc, const ScatterMap& map,
                      const std::vector<PointTangent>& tangent, double* values);

}  // namespace reference

namespace detail {

// Symmetric tensors as (xx, yy, xy); A : B = xx + yy + 2 xy products.
struct Sym3 {
  double xx = 0.0, yy = 0.0, xy = 0.0;
};

inline double frob(const Sym3& a, const Sym3& b) {
  return a.xx * b.xx + a.yy * b.yy + 2.0 * a.xy * b.xy;
}

inline Sym3 pack(const SymTensor2& t) { return {t(0, 0), t(1, 1), t(0, 1)}; }

inline SymTensor2 unpack(const Sym3& s) {
  Eigen::Matrix2d m;
  m << s.xx, s.xy, s.xy, s.yy;
  return SymTensor2(m);
}

// eps(phi) for the 12 local velocity dofs at quadrature point qp.
inline void local_strains(const Discretization& disc, std::size_t qp, Sym3 (&eps)[12]) {
  const auto& g = disc.p2_gradients(qp);
  for (int a = 0; a < 6; ++a) {
    const double gx = g[static_cast<std::size_t>(a)](0), gy = g[static_cast<std::size_t>(a)](1);
    eps[2 * a] = {gx, 0.0, 0.5 * gy};
    eps[2 * a + 1] = {0.0, gy, 0.5 * gx};
  }
}

void element_sym_gradient(const Discretization& disc, std::size_t t, const Eigen::VectorXd& v,
                          SymTensor2* out);
void element_stress(const Discretization& disc, std::size_t t, const std::vector<SymTensor2>& sigma,
                    double (&out)[12]);
void element_tangent(const Discretization& disc, std::size_t t,
                     const std::vector<PointTangent>& tangent, double (&out)[144]);

}  // namespace detail

}  // namespace shear
