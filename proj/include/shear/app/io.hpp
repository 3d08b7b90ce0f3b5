#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shear/discretization.hpp"
#include "shear/fields.hpp"

namespace shear::app {

using Json = nlohmann::json;

struct VtkData {
  std::vector<std::pair<std::string, const FeField*>> point_vectors;  // P2 velocity-space fields
  const FeField* pressure = nullptr;                                   // P1, linear on edge nodes
  std::vector<std::pair<std::string, std::vector<double>>> cell_scalars;
};

/// Legacy ASCII unstructured grid with quadratic triangles (cell type 22);
/// points are the P2 nodes in dof-map order.
void write_vtk(const std::string& path, const DofMap& dofs, const VtkData& data, const std::string& title);

/// Weighted element averages of a per-quadrature-point quantity.
std::vector<double> cell_average(const Discretization& disc, const std::vector<double>& per_point);

/// x, y, value_x, value_y per P2 node.
void write_field_csv(const std::string& path, const FeField& field);
/// x, y, then one column per named per-quadrature-point series.
void write_point_csv(const std::string& path, const Discretization& disc,
                     const std::vector<std::pair<std::string, const std::vector<double>*>>& columns);
/// Header row then rows of numbers, full precision.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

}  // namespace shear::app
