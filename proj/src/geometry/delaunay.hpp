#pragma once

#include <array>
#include <vector>

#include "hdgbem/types.hpp"

namespace hdgbem::geometry::detail {

// Bowyer-Watson triangulation of the convex hull of `points`. Triangles are
// counterclockwise. Points should be in general position; callers jitter
// lattice points to break cocircular ties.
std::vector<std::array<int, 3>> delaunay_triangulate(const std::vector<Point>& points);

}  // namespace hdgbem::geometry::detail
