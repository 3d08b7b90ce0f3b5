#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace shear {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

/// Conforming 2D triangulation. Triangles are stored counter-clockwise; the
/// whole topological boundary carries the Dirichlet tag.
class Mesh {
 public:
  using Triangle = std::array<int, 3>;
  using Edge = std::array<int, 2>;  // sorted vertex pair

  /// Validates orientation and conformity, then derives edges and boundary.
  Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles);

  /// Crossed-diagonal triangulation: every cell is split into four
  /// triangles through an added center vertex.
  static Mesh structured(int nx, int ny, Rect rect = {});

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Local edge k of triangle t joins local vertices k and (k + 1) % 3.
  const std::vector<std::array<int, 3>>& triangle_edges() const { return triangle_edges_; }
  const std::vector<int>& boundary_edges() const { return boundary_edges_; }
  bool is_boundary_vertex(int v) const { return boundary_vertex_[static_cast<std::size_t>(v)]; }
  bool is_boundary_edge(int e) const { return boundary_edge_[static_cast<std::size_t>(e)]; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  double signed_area(std::size_t t) const;
  double area() const;
  /// Longest edge length, used as the mesh size h.
  double max_edge_length() const;

 private:
  void build_topology();
  void check_conformity() const;

  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<int> boundary_edges_;
  std::vector<bool> boundary_vertex_;
  std::vector<bool> boundary_edge_;
};

/// Plain-text mesh format:
///   <num_vertices> <num_triangles>
///   x y            (num_vertices lines)
///   i j k          (num_triangles lines, 0-based vertex indices)
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const Mesh& mesh);
void write_mesh_file(const std::string& path, const Mesh& mesh);

}  // namespace shear
