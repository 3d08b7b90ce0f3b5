#include "shear/kernels.hpp"

#include <sstream>

#include "shear/errors.hpp"

namespace shear {

namespace detail {

void element_sym_gradient(const Discretization& disc, std::size_t t, const Eigen::VectorXd& v,
                          SymTensor2* out) {
  const auto dofs = disc.dofs().element_velocity_dofs(t);
  double c[12];
  for (int i = 0; i < 12; ++i) c[i] = v(dofs[static_cast<std::size_t>(i)]);
  const int nq = disc.points_per_element();
  for (int q = 0; q < nq; ++q) {
    const std::size_t qp = t * static_cast<std::size_t>(nq) + static_cast<std::size_t>(q);
    Sym3 eps[12];
    local_strains(disc, qp, eps);
    Sym3 s;
    for (int i = 0; i < 12; ++i) {
      s.xx += c[i] * eps[i].xx;
      s.yy += c[i] * eps[i].yy;
      s.xy += c[i] * eps[i].xy;
    }
    out[q] = unpack(s);
  }
}

void element_stress(const Discretization& disc, std::size_t t, const std::vector<SymTensor2>& sigma,
                    double (&out)[12]) {
  for (double& o : out) o = 0.0;
  const int nq = disc.points_per_element();
  for (int q = 0; q < nq; ++q) {
    const std::size_t qp = t * static_cast<std::size_t>(nq) + static_cast<std::size_t>(q);
    Sym3 eps[12];
    local_strains(disc, qp, eps);
    const Sym3 s = pack(sigma[qp]);
    const double w = disc.weight(qp);
    for (int i = 0; i < 12; ++i) out[i] += w * frob(s, eps[i]);
  }
}

void element_tangent(const Discretization& disc, std::size_t t,
                     const std::vector<PointTangent>& tangent, double (&out)[144]) {
  for (double& o : out) o = 0.0;
  const int nq = disc.points_per_element();
  for (int q = 0; q < nq; ++q) {
    const std::size_t qp = t * static_cast<std::size_t>(nq) + static_cast<std::size_t>(q);
    const PointTangent& tg = tangent[qp];
    if (tg.a == 0.0 && tg.b == 0.0) continue;
    Sym3 eps[12];
    local_strains(disc, qp, eps);
    const double w = disc.weight(qp);
    const Sym3 n = pack(tg.n);
    double proj[12];
    for (int i = 0; i < 12; ++i) proj[i] = frob(n, eps[i]);
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 12; ++j) {
        out[12 * i + j] += w * (tg.a * frob(eps[i], eps[j]) + tg.b * proj[i] * proj[j]);
      }
    }
  }
}

}  // namespace detail

namespace {

void check_points(const Discretization& disc, std::size_t n, const char* what) {
  if (n != disc.num_points()) {
    std::ostringstream os;
    os << what << ": expected " << disc.num_points() << " quadrature values, got " << n;
    throw ShapeError(os.str());
  }
}

void check_velocity(const Discretization& disc, const Eigen::VectorXd& v) {
  if (v.size() != disc.dofs().num_velocity()) throw ShapeError("velocity vector size mismatch");
}

}  // namespace

namespace kernels {

std::vector<SymTensor2> sym_gradient(const Discretization& disc, const Eigen::VectorXd& v, Exec exec) {
  if (exec == Exec::serial) return reference::sym_gradient(disc, v);
  check_velocity(disc, v);
  std::vector<SymTensor2> out(disc.num_points());
  const long nt = static_cast<long>(disc.num_elements());
  const auto nq = static_cast<std::size_t>(disc.points_per_element());
#pragma omp parallel for schedule(static)
  for (long t = 0; t < nt; ++t) {
    detail::element_sym_gradient(disc, static_cast<std::size_t>(t), v, &out[static_cast<std::size_t>(t) * nq]);
  }
  return out;
}

Eigen::VectorXd integrate_stress(const Discretization& disc, const std::vector<SymTensor2>& sigma,
                                 Exec exec) {
  if (exec == Exec::serial) return reference::integrate_stress(disc, sigma);
  check_points(disc, sigma.size(), "integrate_stress");
  const std::size_t nt = disc.num_elements();
  std::vector<double> local(nt * 12);
#pragma omp parallel for schedule(static)
  for (long t = 0; t < static_cast<long>(nt); ++t) {
    double buf[12];
    detail::element_stress(disc, static_cast<std::size_t>(t), sigma, buf);
    std::copy(buf, buf + 12, &local[static_cast<std::size_t>(t) * 12]);
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(disc.dofs().num_velocity());
  for (std::size_t t = 0; t < nt; ++t) {
    const auto dofs = disc.dofs().element_velocity_dofs(t);
    for (int i = 0; i < 12; ++i) f(dofs[static_cast<std::size_t>(i)]) += local[t * 12 + static_cast<std::size_t>(i)];
  }
  return f;
}

void assemble_tangent(const Discretization& disc, const ScatterMap& map,
                      const std::vector<PointTangent>& tangent, double* values, Exec exec) {
  if (exec == Exec::serial) {
    reference::assemble_tangent(disc, map, tangent, values);
    return;
  }
  check_points(disc, tangent.size(), "assemble_tangent");
  const std::size_t nt = disc.num_elements();
  std::vector<double> local(nt * 144);
#pragma omp parallel for schedule(static)
  for (long t = 0; t < static_cast<long>(nt); ++t) {
    double buf[144];
    detail::element_tangent(disc, static_cast<std::size_t>(t), tangent, buf);
    std::copy(buf, buf + 144, &local[static_cast<std::size_t>(t) * 144]);
  }
  for (std::size_t k = 0; k < nt * 144; ++k) {
    const int s = map.slots[k];
    if (s >= 0) values[s] += local[k];
  }
}

}  // namespace kernels

}  // namespace shear
