#pragma once

#include <map>

#include "hdgbem/geometry/mesh.hpp"

namespace hdgbem::test {

inline const geometry::Curve& unit_circle() {
  static const auto c = geometry::Curve::circle(Point::Zero(), 1.0);
  return c;
}

inline const geometry::Curve& inner_circle() {
  static const auto c = geometry::Curve::circle(Point::Zero(), 0.5);
  return c;
}

/// Annulus 0.5 < r < 1 meshes, built once per size.
inline const geometry::UnfittedMesh& annulus(double h) {
  static std::map<double, geometry::UnfittedMesh> cache;
  auto it = cache.find(h);
  if (it == cache.end()) it = cache.emplace(h, geometry::build_annulus_mesh(unit_circle(), inner_circle(), h, 8.0)).first;
  return it->second;
}

}  // namespace hdgbem::test
