#pragma once

#include <vector>

namespace shear {

struct QuadPoint {
  double xi = 0.0;   // barycentric-free reference coordinates on
  double eta = 0.0;  // the triangle (0,0), (1,0), (0,1)
  double weight = 0.0;
};

/// Symmetric triangle rule exact for polynomials of total degree <= order.
/// Weights sum to the reference area 1/2.
std::vector<QuadPoint> triangle_rule(int order);

}  // namespace shear
