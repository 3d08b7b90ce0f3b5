#include "shear/app/io.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace shear::app {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_vtk(const std::string& path, const DofMap& dofs, const VtkData& data, const std::string& title) {
  const Mesh& mesh = dofs.mesh();
  std::ofstream out = open_out(path);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  const int nn = dofs.num_nodes();
  out << "POINTS " << nn << " double\n";
  for (int n = 0; n < nn; ++n) {
    const Point p = dofs.node_point(n);
    out << p.x << ' ' << p.y << " 0\n";
  }
  const std::size_t nt = mesh.num_triangles();
  out << "CELLS " << nt << ' ' << nt * 7 << '\n';
  for (std::size_t t = 0; t < nt; ++t) {
    out << 6;
    for (int n : dofs.element_nodes(t)) out << ' ' << n;
    out << '\n';
  }
  out << "CELL_TYPES " << nt << '\n';
  for (std::size_t t = 0; t < nt; ++t) out << "22\n";

  if (!data.point_vectors.empty() || data.pressure) {
    out << "POINT_DATA " << nn << '\n';
    for (const auto& [name, f] : data.point_vectors) {
      out << "VECTORS " << name << " double\n";
      const Eigen::VectorXd& c = f->coefficients();
      for (int n = 0; n < nn; ++n) out << c(2 * n) << ' ' << c(2 * n + 1) << " 0\n";
    }
    if (data.pressure) {
      const Eigen::VectorXd& p = data.pressure->coefficients();
      out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
      const int nv = static_cast<int>(mesh.num_vertices());
      for (int n = 0; n < nn; ++n) {
        if (n < nv) {
          out << p(n) << '\n';
        } else {
          const auto& e = mesh.edges()[static_cast<std::size_t>(n - nv)];
          out << 0.5 * (p(e[0]) + p(e[1])) << '\n';
        }
      }
    }
  }
  if (!data.cell_scalars.empty()) {
    out << "CELL_DATA " << nt << '\n';
    for (const auto& [name, v] : data.cell_scalars) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double x : v) out << x << '\n';
    }
  }
}

std::vector<double> cell_average(const Discretization& disc, const std::vector<double>& per_point) {
  const std::size_t nq = static_cast<std::size_t>(disc.points_per_element());
  std::vector<double> out(disc.num_elements(), 0.0);
  for (std::size_t t = 0; t < out.size(); ++t) {
    double s = 0.0, w = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      s += disc.weight(t * nq + q) * per_point[t * nq + q];
      w += disc.weight(t * nq + q);
    }
    out[t] = s / w;
  }
  return out;
}

void write_field_csv(const std::string& path, const FeField& field) {
  std::ofstream out = open_out(path);
  out << "x,y,value_x,value_y\n";
  const DofMap& d = field.dofs();
  const Eigen::VectorXd& c = field.coefficients();
  for (int n = 0; n < d.num_nodes(); ++n) {
    const Point p = d.node_point(n);
    out << p.x << ',' << p.y << ',' << c(2 * n) << ',' << c(2 * n + 1) << '\n';
  }
}

void write_point_csv(const std::string& path, const Discretization& disc,
                     const std::vector<std::pair<std::string, const std::vector<double>*>>& columns) {
  std::ofstream out = open_out(path);
  out << "x,y";
  for (const auto& [name, v] : columns) out << ',' << name;
  out << '\n';
  for (std::size_t q = 0; q < disc.num_points(); ++q) {
    const Point& p = disc.point(q);
    out << p.x << ',' << p.y;
    for (const auto& [name, v] : columns) out << ',' << (*v)[q];
    out << '\n';
  }
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return Json::parse(in);
}

}  // namespace shear::app
