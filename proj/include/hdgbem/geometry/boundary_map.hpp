#pragma once

#include <vector>

#include "hdgbem/geometry/mesh.hpp"

namespace hdgbem::geometry {

enum class MapStrategy { automatic, radial, closest_point };

struct BoundaryMapOptions {
  MapStrategy strategy = MapStrategy::automatic;
  int nodes_per_edge = 6;
  double tangency_floor = 0.1;
};

/// Transfer data for one boundary edge: Gauss nodes x on the edge, their
/// images xbar on the curve, path lengths l and unit directions t with
/// x + l t = xbar.
struct EdgeTransfer {
  int edge = -1;
  int element = -1;
  BoundaryTag tag = BoundaryTag::gamma;
  Point a = Point::Zero(), b = Point::Zero();  // edge endpoints in global edge orientation
  double length = 0.0;
  Point nu_h = Point::Zero();  // outward normal of the computational domain
  std::vector<double> xi;      // reference coordinates in [0, 1] along a -> b
  std::vector<double> weights; // physical weights, summing to length
  std::vector<Point> x, xbar, t, n;  // n: outward normal of the true domain at xbar
  std::vector<double> l, s;          // s: curve parameter of xbar
  double s_a = 0.0, s_b = 0.0;       // curve parameters of the endpoint images
  double l_a = 0.0, l_b = 0.0;
};

struct BoundaryMap {
  std::vector<EdgeTransfer> edges;  // parallel to mesh.boundary_edges
  int nodes_per_edge = 0;
};

BoundaryMap build_boundary_map(const UnfittedMesh& mesh, const Curve& gamma, const Curve& gamma0,
                               const BoundaryMapOptions& options = {});

/// Region between a boundary edge and the curve, parametrised by the
/// blended map F(xi, eta) = (1 - eta) (a + xi (b - a)) + eta y(s_a + xi ds).
struct ExtensionPatch {
  int boundary_index = -1;
  int edge = -1;
  int element = -1;
  BoundaryTag tag = BoundaryTag::gamma;
  double s_begin = 0.0, s_end = 0.0;  // arc interval, s_end - s_begin in (-pi, pi]
  std::vector<Point> points;
  std::vector<double> weights;
  double area = 0.0;           // quadrature area
  double boundary_area = 0.0;  // area from the boundary integral
};

std::vector<ExtensionPatch> build_extension_patches(const UnfittedMesh& mesh, const BoundaryMap& bmap,
                                                    const Curve& gamma, const Curve& gamma0, int order = 10);

struct ProximityReport {
  double R_h = 0.0;
  double normal_deviation = 0.0;  // max |n_h - n|_inf over map nodes
  int worst_edge = -1;
};

ProximityReport proximity_parameter(const UnfittedMesh& mesh, const BoundaryMap& bmap);

/// Index of the patch whose arc interval holds curve parameter s, or -1.
int locate_patch(const std::vector<ExtensionPatch>& patches, BoundaryTag tag, double s);

}  // namespace hdgbem::geometry
