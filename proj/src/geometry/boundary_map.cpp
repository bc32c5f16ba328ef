#include "hdgbem/geometry/boundary_map.hpp"

#include <cmath>
#include <sstream>

#include "hdgbem/errors.hpp"
#include "hdgbem/quadrature.hpp"

namespace hdgbem::geometry {

namespace {

struct Image {
  double s;
  Point xbar;
};

Image map_point(const Curve& curve, const Point& x, MapStrategy strategy) {
  const bool radial = strategy == MapStrategy::radial || (strategy == MapStrategy::automatic && curve.is_circle());
  if (radial) {
    if (!curve.is_circle()) throw MapConstructionError("radial mapping is only available for circles");
    const Point r = x - curve.center();
    const double s = wrap_parameter(std::atan2(r.y(), r.x()));
    return {s, curve.position(s)};
  }
  const auto p = curve.closest_point(x);
  return {p.s, p.point};
}

}  // namespace

BoundaryMap build_boundary_map(const UnfittedMesh& mesh, const Curve& gamma, const Curve& gamma0,
                               const BoundaryMapOptions& options) {
  if (mesh.boundary_tags.size() != mesh.boundary_edges.size())
    throw MapConstructionError("boundary edges must be classified before mapping");
  const auto rule = gauss_legendre<double>(options.nodes_per_edge);
  const double zero_gap = 1e-13 * std::max(1.0, gamma.diameter());
  BoundaryMap bmap;
  bmap.nodes_per_edge = options.nodes_per_edge;
  bmap.edges.resize(mesh.boundary_edges.size());
  for (std::size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
    const int e = mesh.boundary_edges[i];
    const auto& edge = mesh.edges[e];
    EdgeTransfer& m = bmap.edges[i];
    m.edge = e;
    m.element = edge.elements[0];
    m.tag = mesh.boundary_tags[i];
    m.a = mesh.vertices[edge.vertices[0]];
    m.b = mesh.vertices[edge.vertices[1]];
    m.length = (m.b - m.a).norm();
    m.nu_h = mesh.element_normal(m.element, edge.local_index[0]);
    const Curve& curve = m.tag == BoundaryTag::gamma ? gamma : gamma0;
    const double normal_sign = m.tag == BoundaryTag::gamma ? 1.0 : -1.0;

    auto fill = [&](const Point& x, double& s, Point& xbar, double& l, Point& t) {
      const Image im = map_point(curve, x, options.strategy);
      s = im.s;
      xbar = im.xbar;
      l = (xbar - x).norm();
      if (l <= zero_gap) {
        l = 0.0;
        t = m.nu_h;
      } else {
        t = (xbar - x) / l;
      }
      if (t.dot(m.nu_h) < options.tangency_floor) {
        std::ostringstream msg;
        msg << "transfer direction nearly tangent on boundary edge " << e << " (t.nu_h = " << t.dot(m.nu_h) << ")";
        throw MapConstructionError(msg.str());
      }
    };

    Point xbar, t;
    fill(m.a, m.s_a, xbar, m.l_a, t);
    fill(m.b, m.s_b, xbar, m.l_b, t);
    const std::size_t q = rule.size();
    m.xi = rule.nodes;
    m.weights.resize(q);
    m.x.resize(q);
    m.xbar.resize(q);
    m.t.resize(q);
    m.n.resize(q);
    m.l.resize(q);
    m.s.resize(q);
    for (std::size_t j = 0; j < q; ++j) {
      m.weights[j] = rule.weights[j] * m.length;
      m.x[j] = m.a + rule.nodes[j] * (m.b - m.a);
      fill(m.x[j], m.s[j], m.xbar[j], m.l[j], m.t[j]);
      m.n[j] = normal_sign * curve.outward_normal(m.s[j]);
    }
  }
  return bmap;
}

std::vector<ExtensionPatch> build_extension_patches(const UnfittedMesh& mesh, const BoundaryMap& bmap,
                                                    const Curve& gamma, const Curve& gamma0, int order) {
  (void)mesh;
  const auto g = gauss_legendre<double>(order);
  const auto arc_rule = gauss_legendre<double>(24);
  std::vector<ExtensionPatch> patches(bmap.edges.size());
  for (std::size_t i = 0; i < bmap.edges.size(); ++i) {
    const EdgeTransfer& m = bmap.edges[i];
    const Curve& curve = m.tag == BoundaryTag::gamma ? gamma : gamma0;
    ExtensionPatch& p = patches[i];
    p.boundary_index = int(i);
    p.edge = m.edge;
    p.element = m.element;
    p.tag = m.tag;
    p.s_begin = m.s_a;
    const double ds = wrap_angle(m.s_b - m.s_a);
    p.s_end = m.s_a + ds;
    const double scale = m.length * std::max({m.l_a, m.l_b, m.length});
    bool positive = false, negative = false;
    for (std::size_t a = 0; a < g.size(); ++a) {
      const double xi = g.nodes[a];
      const Point lin = m.a + xi * (m.b - m.a);
      const Point y = curve.position(m.s_a + xi * ds);
      const Point yd = curve.derivative(m.s_a + xi * ds) * ds;
      for (std::size_t b = 0; b < g.size(); ++b) {
        const double eta = g.nodes[b];
        const Point f_xi = (1.0 - eta) * (m.b - m.a) + eta * yd;
        const Point f_eta = y - lin;
        const double det = cross2(f_xi, f_eta);
        if (det > 1e-13 * scale) positive = true;
        if (det < -1e-13 * scale) negative = true;
        const double w = g.weights[a] * g.weights[b] * std::abs(det);
        p.points.push_back((1.0 - eta) * lin + eta * y);
        p.weights.push_back(w);
        p.area += w;
      }
    }
    if (positive && negative)
      throw PatchConstructionError("extension patch of boundary edge " + std::to_string(m.edge) + " folds over");
    // Green's theorem around a -> b -> y(s_b) -> arc back to y(s_a) -> a.
    // Coordinates relative to a keep the round-off at the scale of the patch.
    const Point yb = curve.position(m.s_a + ds) - m.a;
    double twice = cross2(m.b - m.a, yb);
    for (std::size_t j = 0; j < arc_rule.size(); ++j) {
      const double s = m.s_a + arc_rule.nodes[j] * ds;
      twice -= arc_rule.weights[j] * ds * cross2(curve.position(s) - m.a, curve.derivative(s));
    }
    p.boundary_area = 0.5 * std::abs(twice);
    if (std::abs(p.boundary_area - p.area) > 1e-8 * std::max(p.area, 1e-300) + 1e-13 * scale)
      throw PatchConstructionError("extension patch of boundary edge " + std::to_string(m.edge) +
                                   " is not a simple region");
  }
  return patches;
}

ProximityReport proximity_parameter(const UnfittedMesh& mesh, const BoundaryMap& bmap) {
  ProximityReport r;
  for (const auto& m : bmap.edges) {
    double d = std::max(m.l_a, m.l_b);
    for (std::size_t j = 0; j < m.l.size(); ++j) {
      d = std::max(d, m.l[j]);
      r.normal_deviation = std::max(r.normal_deviation, (m.nu_h - m.n[j]).cwiseAbs().maxCoeff());
    }
    const double ratio = d / mesh.element_diameter[m.element];
    if (ratio > r.R_h || r.worst_edge < 0) {
      r.R_h = std::max(r.R_h, ratio);
      r.worst_edge = m.edge;
    }
  }
  return r;
}

int locate_patch(const std::vector<ExtensionPatch>& patches, BoundaryTag tag, double s) {
  constexpr double eps = 1e-12;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const auto& p = patches[i];
    if (p.tag != tag) continue;
    const double width = p.s_end - p.s_begin;
    const double offset = wrap_angle(s - p.s_begin);
    if (width >= 0.0 ? (offset >= -eps && offset <= width + eps) : (offset <= eps && offset >= width - eps))
      return int(i);
  }
  return -1;
}

}  // namespace hdgbem::geometry
