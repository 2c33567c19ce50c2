#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fracsys {

struct EnclosingBall {
  std::vector<double> center;
  double radius = 0.0;
  /// False when the iterative heuristic was used (dimension above 3).
  bool exact = true;
};

/// Smallest ball containing `count` points of dimension `dim` stored row by row.
/// Exact (move-to-front Welzl) for dim <= 3; Badoiu-Clarkson iteration seeded by
/// Ritter's ball otherwise, within a few percent of optimal.
EnclosingBall smallest_enclosing_ball(std::span<const double> points, int dim);

/// Largest pairwise distance.
double point_set_diameter(std::span<const double> points, int dim);

}  // namespace fracsys
