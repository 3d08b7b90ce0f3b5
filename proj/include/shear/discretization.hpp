#pragma once

#include <Eigen/Core>

#include <array>
#include <memory>
#include <vector>

#include "shear/mesh.hpp"
#include "shear/quadrature.hpp"

namespace shear {

enum class Role { velocity, pressure, control, adjoint, direction };

const char* role_name(Role role);

/// Taylor-Hood P2/P1 numbering. P2 nodes are the mesh vertices followed by
/// the edge midpoints; velocity dof of node n and component c is 2 n + c.
/// Pressure dofs coincide with vertex indices.
class DofMap {
 public:
  explicit DofMap(std::shared_ptr<const Mesh> mesh);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }

  int num_nodes() const { return num_nodes_; }
  int num_velocity() const { return 2 * num_nodes_; }
  int num_pressure() const { return static_cast<int>(mesh_->num_vertices()); }
  /// Coefficient count for a field of the given role.
  int size(Role role) const;

  /// Local node order: v0, v1, v2, midpoint(v0,v1), midpoint(v1,v2), midpoint(v2,v0).
  std::array<int, 6> element_nodes(std::size_t t) const;
  /// Local dof 2 a + c for local node a and component c.
  std::array<int, 12> element_velocity_dofs(std::size_t t) const;
  std::array<int, 3> element_pressure_dofs(std::size_t t) const;

  Point node_point(int node) const;
  bool is_dirichlet(int velocity_dof) const { return dirichlet_[static_cast<std::size_t>(velocity_dof)]; }
  const std::vector<bool>& dirichlet_mask() const { return dirichlet_; }
  /// Whether fields of this role carry homogeneous Dirichlet values.
  static bool constrained(Role role) {
    return role == Role::velocity || role == Role::adjoint || role == Role::direction;
  }

 private:
  std::shared_ptr<const Mesh> mesh_;
  int num_nodes_ = 0;
  std::vector<bool> dirichlet_;
};

/// Reference-to-physical data for every (element, quadrature point) pair,
/// stored flat with index t * points_per_element() + q.
class Discretization {
 public:
  Discretization(std::shared_ptr<const DofMap> dofs, int quad_order = 4);

  const DofMap& dofs() const { return *dofs_; }
  std::shared_ptr<const DofMap> dofs_ptr() const { return dofs_; }
  const Mesh& mesh() const { return dofs_->mesh(); }
  int quad_order() const { return quad_order_; }

  std::size_t num_elements() const { return mesh().num_triangles(); }
  int points_per_element() const { return static_cast<int>(rule_.size()); }
  std::size_t num_points() const { return weights_.size(); }

  /// Quadrature weight times |det J|.
  double weight(std::size_t qp) const { return weights_[qp]; }
  const std::vector<double>& weights() const { return weights_; }
  const Point& point(std::size_t qp) const { return points_[qp]; }
  /// P2 shape values, local node order.
  const std::array<double, 6>& p2_values(int q) const { return p2_val_[static_cast<std::size_t>(q)]; }
  /// P1 shape values at the reference quadrature point.
  const std::array<double, 3>& p1_values(int q) const { return p1_val_[static_cast<std::size_t>(q)]; }
  /// Physical P2 shape gradients at quadrature point qp.
  const std::array<Eigen::Vector2d, 6>& p2_gradients(std::size_t qp) const { return p2_grad_[qp]; }
  /// Physical P1 gradients of element t (constant).
  const std::array<Eigen::Vector2d, 3>& p1_gradients(std::size_t t) const { return p1_grad_[t]; }
  double element_area(std::size_t t) const { return areas_[t]; }

 private:
  std::shared_ptr<const DofMap> dofs_;
  int quad_order_;
  std::vector<QuadPoint> rule_;
  std::vector<double> weights_;
  std::vector<Point> points_;
  std::vector<std::array<double, 6>> p2_val_;
  std::vector<std::array<double, 3>> p1_val_;
  std::vector<std::array<Eigen::Vector2d, 6>> p2_grad_;
  std::vector<std::array<Eigen::Vector2d, 3>> p1_grad_;
  std::vector<double> areas_;
};

std::shared_ptr<const Discretization> make_discretization(const Mesh& mesh, int quad_order = 4);
std::shared_ptr<const Discretization> make_discretization(std::shared_ptr<const Mesh> mesh,
                                                          int quad_order = 4);

}  // namespace shear
