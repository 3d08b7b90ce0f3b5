#include "shear/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "shear/errors.hpp"

namespace shear {

namespace {

double cross(const Point& a, const Point& b, const Point& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  if (triangles_.empty()) throw MeshError("mesh has no triangles");
  const int nv = static_cast<int>(vertices_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int v : triangles_[t]) {
      if (v < 0 || v >= nv) {
        std::ostringstream os;
        os << "triangle " << t << " references vertex " << v << " outside [0," << nv << ")";
        throw MeshError(os.str());
      }
    }
    if (!(signed_area(t) > 0.0)) {
      std::ostringstream os;
      os << "triangle " << t << " has non-positive signed area " << signed_area(t);
      throw MeshError(os.str());
    }
  }
  build_topology();
  check_conformity();
}

Mesh Mesh::structured(int nx, int ny, Rect rect) {
  if (nx < 1 || ny < 1) throw ParameterError("structured mesh requires nx, ny >= 1");
  if (!(rect.x1 > rect.x0) || !(rect.y1 > rect.y0)) {
    throw ParameterError("structured mesh requires a non-degenerate rectangle");
  }
  const double hx = (rect.x1 - rect.x0) / nx;
  const double hy = (rect.y1 - rect.y0) / ny;
  std::vector<Point> v;
  v.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1) + nx * ny));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) v.push_back({rect.x0 + i * hx, rect.y0 + j * hy});
  }
  const int grid = (nx + 1) * (ny + 1);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) v.push_back({rect.x0 + (i + 0.5) * hx, rect.y0 + (j + 0.5) * hy});
  }
  std::vector<Triangle> tris;
  tris.reserve(static_cast<std::size_t>(4 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = j * (nx + 1) + i;  // lower-left
      const int b = a + 1;             // lower-right
      const int c = a + nx + 2;        // upper-right
      const int d = a + nx + 1;        // upper-left
      const int m = grid + j * nx + i;
      tris.push_back({a, b, m});
      tris.push_back({b, c, m});
      tris.push_back({c, d, m});
      tris.push_back({d, a, m});
    }
  }
  return Mesh(std::move(v), std::move(tris));
}

void Mesh::build_topology() {
  std::map<Edge, int> index;
  std::vector<int> count;
  triangle_edges_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int a = triangles_[t][static_cast<std::size_t>(k)];
      int b = triangles_[t][static_cast<std::size_t>((k + 1) % 3)];
      if (a > b) std::swap(a, b);
      const Edge key{a, b};
      auto it = index.find(key);
      int id;
      if (it == index.end()) {
        id = static_cast<int>(edges_.size());
        index.emplace(key, id);
        edges_.push_back(key);
        count.push_back(0);
      } else {
        id = it->second;
      }
      ++count[static_cast<std::size_t>(id)];
      triangle_edges_[t][static_cast<std::size_t>(k)] = id;
    }
  }
  boundary_vertex_.assign(vertices_.size(), false);
  boundary_edge_.assign(edges_.size(), false);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (count[e] > 2) {
      std::ostringstream os;
      os << "edge (" << edges_[e][0] << "," << edges_[e][1] << ") shared by " << count[e]
         << " triangles";
      throw MeshError(os.str());
    }
    if (count[e] == 1) {
      boundary_edges_.push_back(static_cast<int>(e));
      boundary_edge_[e] = true;
      boundary_vertex_[static_cast<std::size_t>(edges_[e][0])] = true;
      boundary_vertex_[static_cast<std::size_t>(edges_[e][1])] = true;
    }
  }
}

void Mesh::check_conformity() const {
  // A hanging node shows up as a boundary vertex lying strictly inside
  // another boundary edge.
  const double scale = max_edge_length();
  for (int e : boundary_edges_) {
    const Point& a = vertices_[static_cast<std::size_t>(edges_[static_cast<std::size_t>(e)][0])];
    const Point& b = vertices_[static_cast<std::size_t>(edges_[static_cast<std::size_t>(e)][1])];
    const double len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
    for (std::size_t v = 0; v < vertices_.size(); ++v) {
      if (!boundary_vertex_[v]) continue;
      if (static_cast<int>(v) == edges_[static_cast<std::size_t>(e)][0] ||
          static_cast<int>(v) == edges_[static_cast<std::size_t>(e)][1]) {
        continue;
      }
      const Point& p = vertices_[v];
      if (std::abs(cross(a, b, p)) > 1e-12 * scale * scale) continue;
      const double t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / len2;
      if (t > 1e-12 && t < 1.0 - 1e-12) {
        std::ostringstream os;
        os << "hanging node: vertex " << v << " lies on boundary edge " << e;
        throw MeshError(os.str());
      }
    }
  }
}

double Mesh::signed_area(std::size_t t) const {
  const auto& tri = triangles_[t];
  return 0.5 * cross(vertices_[static_cast<std::size_t>(tri[0])], vertices_[static_cast<std::size_t>(tri[1])],
                     vertices_[static_cast<std::size_t>(tri[2])]);
}

double Mesh::area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) a += signed_area(t);
  return a;
}

double Mesh::max_edge_length() const {
  double h = 0.0;
  for (const auto& tri : triangles_) {
    for (int k = 0; k < 3; ++k) {
      const Point& a = vertices_[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
      const Point& b = vertices_[static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 1) % 3)])];
      h = std::max(h, std::hypot(b.x - a.x, b.y - a.y));
    }
  }
  return h;
}

Mesh read_mesh(std::istream& in) {
  long nv = -1, nt = -1;
  if (!(in >> nv >> nt) || nv < 3 || nt < 1) throw MeshError("mesh file: bad header counts");
  std::vector<Point> v(static_cast<std::size_t>(nv));
  for (auto& p : v) {
    if (!(in >> p.x >> p.y)) throw MeshError("mesh file: truncated vertex block");
  }
  std::vector<Mesh::Triangle> t(static_cast<std::size_t>(nt));
  for (auto& tri : t) {
    if (!(in >> tri[0] >> tri[1] >> tri[2])) throw MeshError("mesh file: truncated triangle block");
  }
  return Mesh(std::move(v), std::move(t));
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path);
  return read_mesh(in);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
  out << std::setprecision(17);
  for (const Point& p : mesh.vertices()) out << p.x << ' ' << p.y << '\n';
  for (const auto& tri : mesh.triangles()) out << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file " + path);
  write_mesh(out, mesh);
}

}  // namespace shear
