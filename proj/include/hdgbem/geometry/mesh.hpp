#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "hdgbem/geometry/curve.hpp"

namespace hdgbem::geometry {

enum class BoundaryTag : int { gamma = 0, gamma0 = 1 };

struct MeshEdge {
  std::array<int, 2> vertices{};     // vertices[0] < vertices[1]
  std::array<int, 2> elements{-1, -1};
  std::array<int, 2> local_index{-1, -1};  // position of the edge inside each element
  bool is_boundary() const { return elements[1] < 0; }
};

/// Triangulation of the computational domain with its boundary split into
/// the part facing the outer curve and the part facing the inner curve.
struct UnfittedMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> elements;          // counterclockwise
  std::vector<MeshEdge> edges;                       // sorted by (min vertex, max vertex)
  std::vector<std::array<int, 3>> element_edges;     // local edge i is opposite vertex i
  std::vector<int> boundary_edges;                   // edge ids in increasing order
  std::vector<BoundaryTag> boundary_tags;            // parallel to boundary_edges
  std::vector<int> boundary_position;                // edge id -> index in boundary_edges, or -1
  std::vector<double> element_diameter;
  double h = 0.0;
  double proximity_constant = 0.0;  // max over boundary nodes of dist(x, curves) / h_T
  bool fitted = false;

  int num_elements() const { return int(elements.size()); }
  int num_edges() const { return int(edges.size()); }
  double element_area(int t) const;
  Point element_centroid(int t) const;
  double shape_ratio(int t) const;  // circumradius / inradius
  double area() const;
  /// Unit normal of edge `local` of element t, pointing out of t.
  Point element_normal(int t, int local) const;
  double edge_length(int e) const { return (vertices[edges[e].vertices[1]] - vertices[edges[e].vertices[0]]).norm(); }
  int count_tag(BoundaryTag tag) const;
};

/// Builds the edge structure from raw vertices and triangles. Elements are
/// reoriented counterclockwise; boundary tags are left empty.
UnfittedMesh mesh_from_triangulation(std::vector<Point> vertices, std::vector<std::array<int, 3>> elements);

UnfittedMesh build_annulus_mesh(const Curve& gamma, const Curve& gamma0, double target_h, double regularity_bound,
                                double gap_factor = 0.5);

/// Structured triangulation of the square annulus [-outer, outer]^2 minus
/// (-inner, inner)^2 whose boundary lies on the returned polygon curves.
struct FittedSquareAnnulus {
  UnfittedMesh mesh;
  Curve gamma;
  Curve gamma0;
};
FittedSquareAnnulus build_fitted_square_annulus(double outer, double inner, int cells_per_side);

BoundaryTag classify_edge(const Point& a, const Point& b, const Curve& gamma, const Curve& gamma0);
void classify_boundary_edges(UnfittedMesh& mesh, const Curve& gamma, const Curve& gamma0);

void write_mesh(std::ostream& out, const UnfittedMesh& mesh);
UnfittedMesh read_mesh(std::istream& in);

}  // namespace hdgbem::geometry
