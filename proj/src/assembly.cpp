#include "shear/assembly.hpp"

#include <algorithm>
#include <cmath>

#include "shear/errors.hpp"

namespace shear {

namespace tangents {

PointTangent regularized(const SymTensor2& e, double g, RegParam delta) {
  const double r = e.norm();
  const double s = r - g;
  if (s <= -delta.delta) return {};
  const RadialProfile p = smoothed_radial_profile(s, delta.delta);
  return {p.phi / r, p.dphi - p.phi / r, (1.0 / r) * e};
}

PointTangent generalized(const SymTensor2& e, double g) {
  const double r = e.norm();
  if (r <= g) return {};
  return {1.0 - g / r, g / r, (1.0 / r) * e};
}

PointTangent directional(const SymTensor2& e, const SymTensor2& h, double g, double band_tol) {
  const double r = e.norm();
  if (std::abs(r - g) <= band_tol) {
    // max(0, E:H) E / g^2 = [E:H > 0] (r/g)^2 (n:H) n
    if (contract(e, h) <= 0.0) return {};
    return {0.0, (r * r) / (g * g), (1.0 / r) * e};
  }
  return generalized(e, g);
}

}  // namespace tangents

Assembler::Assembler(std::shared_ptr<const Discretization> disc, Exec exec)
    : disc_(std::move(disc)), exec_(exec) {
  if (!disc_) throw ShapeError("Assembler requires a discretization");
  area_ = disc_->mesh().area();
  build_pattern();
  build_linear_operators();
}

void Assembler::build_pattern() {
  const DofMap& d = dofs();
  const std::size_t nt = disc_->num_elements();
  const int n = d.num_velocity();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nt * 144);
  scatter_.dofs_per_element = 12;
  scatter_.global_dofs.resize(nt * 12);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto dofs = d.element_velocity_dofs(t);
    std::copy(dofs.begin(), dofs.end(), scatter_.global_dofs.begin() + static_cast<long>(t * 12));
    for (int i : dofs) {
      for (int j : dofs) trip.emplace_back(i, j, 0.0);
    }
  }
  pattern_.resize(n, n);
  pattern_.setFromTriplets(trip.begin(), trip.end());
  pattern_.makeCompressed();
  scatter_.slots.resize(nt * 144);
  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  for (std::size_t t = 0; t < nt; ++t) {
    for (int i = 0; i < 12; ++i) {
      const int row = scatter_.global_dofs[t * 12 + static_cast<std::size_t>(i)];
      for (int j = 0; j < 12; ++j) {
        const int col = scatter_.global_dofs[t * 12 + static_cast<std::size_t>(j)];
        const int* pos = std::lower_bound(inner + outer[col], inner + outer[col + 1], row);
        scatter_.slots[t * 144 + static_cast<std::size_t>(12 * i + j)] = static_cast<int>(pos - inner);
      }
    }
  }
}

void Assembler::build_linear_operators() {
  const DofMap& d = dofs();
  const std::size_t nt = disc_->num_elements();
  const int nq = disc_->points_per_element();

  std::vector<PointTangent> identity(disc_->num_points(), PointTangent{1.0, 0.0, SymTensor2{}});
  ops_.strain = tangent_matrix(identity);

  SparseMatrix mass = pattern_;
  SparseMatrix grad = pattern_;
  double* mv = mass.valuePtr();
  double* gv = grad.valuePtr();
  std::vector<Eigen::Triplet<double>> btrip;
  btrip.reserve(nt * 36);
  ops_.pressure_weights = Eigen::VectorXd::Zero(d.num_pressure());
  for (std::size_t t = 0; t < nt; ++t) {
    double me[144] = {};
    double ge[144] = {};
    double be[36] = {};
    for (int q = 0; q < nq; ++q) {
      const std::size_t qp = t * static_cast<std::size_t>(nq) + static_cast<std::size_t>(q);
      const double w = disc_->weight(qp);
      const auto& val = disc_->p2_values(q);
      const auto& gr = disc_->p2_gradients(qp);
      const auto& psi = disc_->p1_values(q);
      for (int a = 0; a < 6; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        for (int b = 0; b < 6; ++b) {
          const auto ub = static_cast<std::size_t>(b);
          const double m = w * val[ua] * val[ub];
          const double k = w * gr[ua].dot(gr[ub]);
          for (int c = 0; c < 2; ++c) {
            me[12 * (2 * a + c) + 2 * b + c] += m;
            ge[12 * (2 * a + c) + 2 * b + c] += k;
          }
        }
        for (int k = 0; k < 3; ++k) {
          for (int c = 0; c < 2; ++c) be[12 * k + 2 * a + c] -= w * psi[static_cast<std::size_t>(k)] * gr[ua](c);
        }
      }
    }
    for (int k = 0; k < 144; ++k) {
      const int s = scatter_.slots[t * 144 + static_cast<std::size_t>(k)];
      mv[s] += me[k];
      gv[s] += ge[k];
    }
    const auto vdofs = d.element_velocity_dofs(t);
    const auto pdofs = d.element_pressure_dofs(t);
    for (int k = 0; k < 3; ++k) {
      for (int j = 0; j < 12; ++j) btrip.emplace_back(pdofs[static_cast<std::size_t>(k)], vdofs[static_cast<std::size_t>(j)], be[12 * k + j]);
      ops_.pressure_weights(pdofs[static_cast<std::size_t>(k)]) += disc_->element_area(t) / 3.0;
    }
  }
  ops_.mass = mass;
  ops_.h1 = mass;
  {
    double* hv = ops_.h1.valuePtr();
    for (Eigen::Index k = 0; k < ops_.h1.nonZeros(); ++k) hv[k] += gv[k];
  }
  ops_.divergence.resize(d.num_pressure(), d.num_velocity());
  ops_.divergence.setFromTriplets(btrip.begin(), btrip.end());
  ops_.divergence.makeCompressed();
}

std::vector<SymTensor2> Assembler::strain(const Eigen::VectorXd& v) const {
  return kernels::sym_gradient(*disc_, v, exec_);
}

Eigen::VectorXd Assembler::nonlinear_term(const std::vector<SymTensor2>& eps, double g,
                                          std::optional<RegParam> delta) const {
  detail::require_threshold(g);
  if (delta) delta->validate(g);
  std::vector<SymTensor2> sigma(eps.size());
  const long n = static_cast<long>(eps.size());
  if (delta) {
    const RegParam dl = *delta;
#pragma omp parallel for schedule(static) if (exec_ == Exec::parallel)
    for (long k = 0; k < n; ++k) sigma[static_cast<std::size_t>(k)] = smoothed_shear_excess(eps[static_cast<std::size_t>(k)], g, dl);
  } else {
#pragma omp parallel for schedule(static) if (exec_ == Exec::parallel)
    for (long k = 0; k < n; ++k) sigma[static_cast<std::size_t>(k)] = shear_excess(eps[static_cast<std::size_t>(k)], g);
  }
  return kernels::integrate_stress(*disc_, sigma, exec_);
}

SparseMatrix Assembler::tangent_matrix(const std::vector<PointTangent>& tangent) const {
  SparseMatrix m = pattern_;
  kernels::assemble_tangent(*disc_, scatter_, tangent, m.valuePtr(), exec_);
  return m;
}

SparseMatrix Assembler::velocity_block(double mu, double nu, const std::vector<PointTangent>* tangent) const {
  SparseMatrix m = pattern_;
  double* v = m.valuePtr();
  const double* a = ops_.strain.valuePtr();
  const Eigen::Index nnz = m.nonZeros();
  for (Eigen::Index k = 0; k < nnz; ++k) v[k] = mu * a[k];
  if (tangent) {
    SparseMatrix t = tangent_matrix(*tangent);
    const double* tv = t.valuePtr();
    for (Eigen::Index k = 0; k < nnz; ++k) v[k] += nu * tv[k];
  }
  return m;
}

Eigen::VectorXd Assembler::residual(const Eigen::VectorXd& y, const Eigen::VectorXd& p,
                                    const Eigen::VectorXd& u, const PlasticityParams& params,
                                    std::optional<RegParam> delta) const {
  const int nv = num_velocity(), np = num_pressure();
  if (y.size() != nv || u.size() != nv || p.size() != np) throw ShapeError("residual: vector size mismatch");
  Eigen::VectorXd r(nv + np);
  Eigen::VectorXd mom = params.mu * (ops_.strain * y) + ops_.divergence.transpose() * p - ops_.mass * u;
  mom += params.nu * nonlinear_term(strain(y), params.g, delta);
  r.head(nv) = mom;
  r.tail(np) = ops_.divergence * y;
  zero_dirichlet_rows(r);
  return r;
}

void Assembler::zero_dirichlet(Eigen::VectorXd& v) const {
  const auto& mask = dofs().dirichlet_mask();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) v(static_cast<Eigen::Index>(i)) = 0.0;
  }
}

void Assembler::zero_dirichlet_rows(Eigen::VectorXd& r) const {
  const auto& mask = dofs().dirichlet_mask();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) r(static_cast<Eigen::Index>(i)) = 0.0;
  }
}

double Assembler::l2_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  return a.dot(ops_.mass * b);
}

double Assembler::l2_norm(const Eigen::VectorXd& v) const { return std::sqrt(std::max(0.0, l2_inner(v, v))); }

double Assembler::h1_norm(const Eigen::VectorXd& v) const {
  return std::sqrt(std::max(0.0, v.dot(ops_.h1 * v)));
}

double Assembler::strain_norm(const Eigen::VectorXd& v) const {
  return std::sqrt(std::max(0.0, v.dot(ops_.strain * v)));
}

Eigen::VectorXd load_vector(const Discretization& disc, const VectorFunction& f) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(disc.dofs().num_velocity());
  const int nq = disc.points_per_element();
  for (std::size_t t = 0; t < disc.num_elements(); ++t) {
    const auto dofs = disc.dofs().element_velocity_dofs(t);
    for (int q = 0; q < nq; ++q) {
      const std::size_t qp = t * static_cast<std::size_t>(nq) + static_cast<std::size_t>(q);
      const Point& x = disc.point(qp);
      const Eigen::Vector2d fv = f(x.x, x.y);
      const auto& val = disc.p2_values(q);
      for (std::size_t a = 0; a < 6; ++a) {
        b(dofs[2 * a]) += disc.weight(qp) * val[a] * fv(0);
        b(dofs[2 * a + 1]) += disc.weight(qp) * val[a] * fv(1);
      }
    }
  }
  return b;
}

double velocity_l2_error(const Discretization& disc, const Eigen::VectorXd& v, const VectorFunction& f) {
  double s = 0.0;
  const int nq = disc.points_per_element();
  for (std::size_t t = 0; t < disc.num_elements(); ++t) {
    const auto dofs = disc.dofs().element_velocity_dofs(t);
    for (int q = 0; q < nq; ++q) {
      const std::size_t qp = t * static_cast<std::size_t>(nq) + static_cast<std::size_t>(q);
      const Point& x = disc.point(qp);
      const auto& val = disc.p2_values(q);
      Eigen::Vector2d vh = Eigen::Vector2d::Zero();
      for (std::size_t a = 0; a < 6; ++a) vh += val[a] * Eigen::Vector2d(v(dofs[2 * a]), v(dofs[2 * a + 1]));
      s += disc.weight(qp) * (vh - f(x.x, x.y)).squaredNorm();
    }
  }
  return std::sqrt(s);
}

double pressure_l2_error(const Discretization& disc, const Eigen::VectorXd& p, const ScalarFunction& f) {
  double s = 0.0;
  const int nq = disc.points_per_element();
  for (std::size_t t = 0; t < disc.num_elements(); ++t) {
    const auto dofs = disc.dofs().element_pressure_dofs(t);
    for (int q = 0; q < nq; ++q) {
      const std::size_t qp = t * static_cast<std::size_t>(nq) + static_cast<std::size_t>(q);
      const Point& x = disc.point(qp);
      const auto& psi = disc.p1_values(q);
      double ph = 0.0;
      for (std::size_t a = 0; a < 3; ++a) ph += psi[a] * p(dofs[a]);
      const double d = ph - f(x.x, x.y);
      s += disc.weight(qp) * d * d;
    }
  }
  return std::sqrt(s);
}

QuadTensorField eval_sym_gradient(const FeField& field, std::shared_ptr<const Discretization> disc) {
  require_field(field, disc->dofs(), {Role::velocity, Role::adjoint, Role::direction}, "eval_sym_gradient");
  return {kernels::sym_gradient(*disc, field.coefficients()), disc};
}

StokesOperator assemble_stokes(const Assembler& assembler, double mu) {
  if (!(mu > 0.0)) throw ParameterError("assemble_stokes requires mu > 0");
  return {assembler.velocity_block(mu, 0.0, nullptr), assembler.ops().divergence};
}

Eigen::VectorXd assemble_nonlinear_residual(const Assembler& assembler, const FeField& y,
                                            const FeField& p, const FeField& u,
                                            const PlasticityParams& params,
                                            std::optional<RegParam> delta) {
  params.validate();
  require_field(y, assembler.dofs(), {Role::velocity}, "assemble_nonlinear_residual(y)");
  require_field(p, assembler.dofs(), {Role::pressure}, "assemble_nonlinear_residual(p)");
  require_field(u, assembler.dofs(), {Role::control}, "assemble_nonlinear_residual(u)");
  return assembler.residual(y.coefficients(), p.coefficients(), u.coefficients(), params, delta);
}

SparseMatrix assemble_jacobian(const Assembler& assembler, const FeField& y,
                               const PlasticityParams& params, RegParam delta) {
  params.validate();
  delta.validate(params.g);
  require_field(y, assembler.dofs(), {Role::velocity}, "assemble_jacobian");
  const auto eps = assembler.strain(y.coefficients());
  std::vector<PointTangent> tg(eps.size());
  for (std::size_t k = 0; k < eps.size(); ++k) tg[k] = tangents::regularized(eps[k], params.g, delta);
  return assembler.velocity_block(params.mu, params.nu, &tg);
}

}  // namespace shear
