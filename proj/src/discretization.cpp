#include "shear/discretization.hpp"

#include <Eigen/LU>

#include <cmath>
#include <sstream>

#include "shear/errors.hpp"

namespace shear {

const char* role_name(Role role) {
  switch (role) {
    case Role::velocity: return "velocity";
    case Role::pressure: return "pressure";
    case Role::control: return "control";
    case Role::adjoint: return "adjoint";
    case Role::direction: return "direction";
  }
  return "unknown";
}

DofMap::DofMap(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
  if (!mesh_) throw ShapeError("DofMap requires a mesh");
  const int nv = static_cast<int>(mesh_->num_vertices());
  num_nodes_ = nv + static_cast<int>(mesh_->num_edges());
  dirichlet_.assign(static_cast<std::size_t>(2 * num_nodes_), false);
  for (int v = 0; v < nv; ++v) {
    if (mesh_->is_boundary_vertex(v)) {
      dirichlet_[static_cast<std::size_t>(2 * v)] = dirichlet_[static_cast<std::size_t>(2 * v + 1)] = true;
    }
  }
  for (int e : mesh_->boundary_edges()) {
    const int n = nv + e;
    dirichlet_[static_cast<std::size_t>(2 * n)] = dirichlet_[static_cast<std::size_t>(2 * n + 1)] = true;
  }
}

int DofMap::size(Role role) const {
  return role == Role::pressure ? num_pressure() : num_velocity();
}

std::array<int, 6> DofMap::element_nodes(std::size_t t) const {
  const auto& tri = mesh_->triangles()[t];
  const auto& ed = mesh_->triangle_edges()[t];
  const int nv = static_cast<int>(mesh_->num_vertices());
  return {tri[0], tri[1], tri[2], nv + ed[0], nv + ed[1], nv + ed[2]};
}

std::array<int, 12> DofMap::element_velocity_dofs(std::size_t t) const {
  const auto nodes = element_nodes(t);
  std::array<int, 12> d{};
  for (std::size_t a = 0; a < 6; ++a) {
    d[2 * a] = 2 * nodes[a];
    d[2 * a + 1] = 2 * nodes[a] + 1;
  }
  return d;
}

std::array<int, 3> DofMap::element_pressure_dofs(std::size_t t) const {
  return mesh_->triangles()[t];
}

Point DofMap::node_point(int node) const {
  const int nv = static_cast<int>(mesh_->num_vertices());
  if (node < nv) return mesh_->vertices()[static_cast<std::size_t>(node)];
  const auto& e = mesh_->edges()[static_cast<std::size_t>(node - nv)];
  const Point& a = mesh_->vertices()[static_cast<std::size_t>(e[0])];
  const Point& b = mesh_->vertices()[static_cast<std::size_t>(e[1])];
  return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

namespace {

// P2 basis on the reference triangle in barycentrics l0 = 1 - xi - eta,
// l1 = xi, l2 = eta; reference gradients are w.r.t. (xi, eta).
void p2_reference(double xi, double eta, std::array<double, 6>& val,
                  std::array<Eigen::Vector2d, 6>& grad) {
  const double l[3] = {1.0 - xi - eta, xi, eta};
  const Eigen::Vector2d dl[3] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
  for (int a = 0; a < 3; ++a) {
    val[static_cast<std::size_t>(a)] = l[a] * (2.0 * l[a] - 1.0);
    grad[static_cast<std::size_t>(a)] = (4.0 * l[a] - 1.0) * dl[a];
  }
  for (int k = 0; k < 3; ++k) {
    const int i = k, j = (k + 1) % 3;
    val[static_cast<std::size_t>(3 + k)] = 4.0 * l[i] * l[j];
    grad[static_cast<std::size_t>(3 + k)] = 4.0 * (l[i] * dl[j] + l[j] * dl[i]);
  }
}

}  // namespace

Discretization::Discretization(std::shared_ptr<const DofMap> dofs, int quad_order)
    : dofs_(std::move(dofs)), quad_order_(quad_order), rule_(triangle_rule(quad_order)) {
  if (!dofs_) throw ShapeError("Discretization requires a dof map");
  const Mesh& m = dofs_->mesh();
  const std::size_t nt = m.num_triangles();
  const std::size_t nq = rule_.size();
  std::vector<std::array<Eigen::Vector2d, 6>> ref_grad(nq);
  p2_val_.resize(nq);
  p1_val_.resize(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    p2_reference(rule_[q].xi, rule_[q].eta, p2_val_[q], ref_grad[q]);
    p1_val_[q] = {1.0 - rule_[q].xi - rule_[q].eta, rule_[q].xi, rule_[q].eta};
  }
  weights_.resize(nt * nq);
  points_.resize(nt * nq);
  p2_grad_.resize(nt * nq);
  p1_grad_.resize(nt);
  areas_.resize(nt);
  const Eigen::Vector2d dl[3] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = m.triangles()[t];
    const Point& p0 = m.vertices()[static_cast<std::size_t>(tri[0])];
    const Point& p1 = m.vertices()[static_cast<std::size_t>(tri[1])];
    const Point& p2 = m.vertices()[static_cast<std::size_t>(tri[2])];
    Eigen::Matrix2d jac;
    jac << p1.x - p0.x, p2.x - p0.x, p1.y - p0.y, p2.y - p0.y;
    const double det = jac.determinant();
    if (!(det > 0.0)) {
      std::ostringstream os;
      os << "element " << t << " has singular or inverted Jacobian (det=" << det << ")";
      throw MeshError(os.str());
    }
    const Eigen::Matrix2d jinv_t = jac.inverse().transpose();
    areas_[t] = 0.5 * det;
    for (int a = 0; a < 3; ++a) p1_grad_[t][static_cast<std::size_t>(a)] = jinv_t * dl[a];
    for (std::size_t q = 0; q < nq; ++q) {
      const std::size_t k = t * nq + q;
      weights_[k] = rule_[q].weight * det;
      points_[k] = {p0.x + jac(0, 0) * rule_[q].xi + jac(0, 1) * rule_[q].eta,
                    p0.y + jac(1, 0) * rule_[q].xi + jac(1, 1) * rule_[q].eta};
      for (std::size_t a = 0; a < 6; ++a) p2_grad_[k][a] = jinv_t * ref_grad[q][a];
    }
  }
}

std::shared_ptr<const Discretization> make_discretization(std::shared_ptr<const Mesh> mesh,
                                                          int quad_order) {
  auto dofs = std::make_shared<const DofMap>(std::move(mesh));
  return std::make_shared<const Discretization>(std::move(dofs), quad_order);
}

std::shared_ptr<const Discretization> make_discretization(const Mesh& mesh, int quad_order) {
  return make_discretization(std::make_shared<const Mesh>(mesh), quad_order);
}

}  // namespace shear
