#pragma once

#include <vector>

namespace pilotscat {

struct BraggOrder {
  int q = 0;
  double theta = 0.0;  // rad
  double sin_theta = 0.0;
};

// Directions of coherent addition along the target normal:
// sin^2(theta_q / 2) = q pi / (k0 a), q = 1 .. q_max.
struct BraggTable {
  double k0 = 0.0;
  double a = 0.0;
  std::vector<BraggOrder> entries;

  bool empty() const { return entries.empty(); }
  int q_max() const { return entries.empty() ? 0 : entries.back().q; }
};

BraggTable bragg_angles(double k0, double a);

}  // namespace pilotscat
