#include "hdgbem/geometry/mesh.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

#include "delaunay.hpp"
#include "hdgbem/errors.hpp"

namespace hdgbem::geometry {

double UnfittedMesh::element_area(int t) const {
  const auto& e = elements[t];
  return 0.5 * cross2(vertices[e[1]] - vertices[e[0]], vertices[e[2]] - vertices[e[0]]);
}

Point UnfittedMesh::element_centroid(int t) const {
  const auto& e = elements[t];
  return (vertices[e[0]] + vertices[e[1]] + vertices[e[2]]) / 3.0;
}

double UnfittedMesh::shape_ratio(int t) const {
  const auto& e = elements[t];
  const double a = (vertices[e[1]] - vertices[e[2]]).norm();
  const double b = (vertices[e[2]] - vertices[e[0]]).norm();
  const double c = (vertices[e[0]] - vertices[e[1]]).norm();
  const double area = std::abs(element_area(t));
  if (area <= 0.0) return std::numeric_limits<double>::infinity();
  const double s = 0.5 * (a + b + c);
  return a * b * c * s / (4.0 * area * area);
}

double UnfittedMesh::area() const {
  double sum = 0.0;
  for (int t = 0; t < num_elements(); ++t) sum += element_area(t);
  return sum;
}

Point UnfittedMesh::element_normal(int t, int local) const {
  const auto& e = elements[t];
  const Point d = vertices[e[(local + 2) % 3]] - vertices[e[(local + 1) % 3]];
  return Point(d.y(), -d.x()) / d.norm();
}

int UnfittedMesh::count_tag(BoundaryTag tag) const {
  return int(std::count(boundary_tags.begin(), boundary_tags.end(), tag));
}

UnfittedMesh mesh_from_triangulation(std::vector<Point> vertices, std::vector<std::array<int, 3>> elements) {
  UnfittedMesh m;
  m.vertices = std::move(vertices);
  m.elements = std::move(elements);
  const int nv = int(m.vertices.size());
  std::vector<std::tuple<int, int, int, int>> sides;
  sides.reserve(3 * m.elements.size());
  for (int t = 0; t < m.num_elements(); ++t) {
    auto& el = m.elements[t];
    for (int v : el)
      if (v < 0 || v >= nv) throw MeshingError("element " + std::to_string(t) + " references a missing vertex");
    double a = m.element_area(t);
    if (a < 0.0) {
      std::swap(el[1], el[2]);
      a = -a;
    }
    if (!(a > 0.0)) throw MeshingError("element " + std::to_string(t) + " is degenerate");
    for (int i = 0; i < 3; ++i) {
      const int p = el[(i + 1) % 3], q = el[(i + 2) % 3];
      sides.emplace_back(std::min(p, q), std::max(p, q), t, i);
    }
  }
  std::sort(sides.begin(), sides.end());
  m.element_edges.assign(m.elements.size(), {-1, -1, -1});
  for (std::size_t i = 0; i < sides.size();) {
    std::size_t j = i;
    while (j < sides.size() && std::get<0>(sides[j]) == std::get<0>(sides[i]) &&
           std::get<1>(sides[j]) == std::get<1>(sides[i]))
      ++j;
    if (j - i > 2) throw MeshingError("edge shared by more than two elements");
    MeshEdge edge;
    edge.vertices = {std::get<0>(sides[i]), std::get<1>(sides[i])};
    for (std::size_t k = i; k < j; ++k) {
      edge.elements[k - i] = std::get<2>(sides[k]);
      edge.local_index[k - i] = std::get<3>(sides[k]);
      m.element_edges[std::get<2>(sides[k])][std::get<3>(sides[k])] = int(m.edges.size());
    }
    m.edges.push_back(edge);
    i = j;
  }
  m.boundary_position.assign(m.edges.size(), -1);
  for (int e = 0; e < m.num_edges(); ++e) {
    if (m.edges[e].is_boundary()) {
      m.boundary_position[e] = int(m.boundary_edges.size());
      m.boundary_edges.push_back(e);
    }
  }
  m.element_diameter.resize(m.elements.size());
  m.h = 0.0;
  for (int t = 0; t < m.num_elements(); ++t) {
    double d = 0.0;
    for (int i = 0; i < 3; ++i) d = std::max(d, m.edge_length(m.element_edges[t][i]));
    m.element_diameter[t] = d;
    m.h = std::max(m.h, d);
  }
  return m;
}

BoundaryTag classify_edge(const Point& a, const Point& b, const Curve& gamma, const Curve& gamma0) {
  const Point mid = 0.5 * (a + b);
  const double d1 = gamma.distance(mid), d0 = gamma0.distance(mid);
  const double tol = 1e-12 * std::max(1.0, gamma.diameter());
  if (std::abs(d1 - d0) > tol) return d1 < d0 ? BoundaryTag::gamma : BoundaryTag::gamma0;
  const double e1 = gamma.distance(a) + gamma.distance(b);
  const double e0 = gamma0.distance(a) + gamma0.distance(b);
  if (e0 + tol < e1) return BoundaryTag::gamma0;
  return BoundaryTag::gamma;
}

void classify_boundary_edges(UnfittedMesh& mesh, const Curve& gamma, const Curve& gamma0) {
  mesh.boundary_tags.resize(mesh.boundary_edges.size());
  for (std::size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
    const auto& e = mesh.edges[mesh.boundary_edges[i]];
    mesh.boundary_tags[i] = classify_edge(mesh.vertices[e.vertices[0]], mesh.vertices[e.vertices[1]], gamma, gamma0);
  }
}

namespace {

bool inside_ring(const std::vector<Point>& ring, const Point& x) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Point& a = ring[i];
    const Point& b = ring[j];
    if ((a.y() > x.y()) != (b.y() > x.y()) && x.x() < (b.x() - a.x()) * (x.y() - a.y()) / (b.y() - a.y()) + a.x())
      inside = !inside;
  }
  return inside;
}

double min_gap(const Curve& gamma, const Curve& gamma0) {
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 256; ++i) {
    const Point x = gamma0.position(kTwoPi * i / 256);
    if (!gamma.contains(x)) throw GeometryInfeasibleError("inner curve is not strictly inside the outer curve");
    gap = std::min(gap, gamma.distance(x));
  }
  return gap;
}

}  // namespace

UnfittedMesh build_annulus_mesh(const Curve& gamma, const Curve& gamma0, double h, double regularity_bound,
                                double gap_factor) {
  if (!(h > 0.0)) throw GeometryInfeasibleError("target mesh size must be positive");
  const double gap = min_gap(gamma, gamma0);
  if (gap < 2.0 * h) {
    std::ostringstream msg;
    msg << "curves are " << gap << " apart, too close for target h = " << h;
    throw GeometryInfeasibleError(msg.str());
  }
  // Offset shrinking faster than h so the proximity ratio tends to zero.
  const double delta = gap_factor * std::pow(h, 1.5);

  std::vector<Point> outer, inner;
  const int n_outer = std::max(8, int(std::ceil(gamma.length() / h)));
  for (double s : gamma.arclength_parameters(n_outer))
    outer.push_back(gamma.position(s) - delta * gamma.outward_normal(s));
  const int n_inner = std::max(8, int(std::ceil(gamma0.length() / h)));
  for (double s : gamma0.arclength_parameters(n_inner))
    inner.push_back(gamma0.position(s) + delta * gamma0.outward_normal(s));

  Point lo = outer[0], hi = outer[0];
  for (const auto& q : outer) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  const double keep_out = delta + 0.6 * h;
  const double smooth_keep_out = delta + 0.55 * h;
  auto admissible = [&](const Point& x, double margin) {
    return inside_ring(outer, x) && !inside_ring(inner, x) && gamma.distance(x) >= margin &&
           gamma0.distance(x) >= margin;
  };
  std::vector<Point> lattice;
  std::mt19937 rng(20240611u);
  std::uniform_real_distribution<double> jitter(-1e-4 * h, 1e-4 * h);
  const double dy = h * std::sqrt(3.0) / 2.0;
  int row = 0;
  for (double y = lo.y(); y <= hi.y(); y += dy, ++row) {
    for (double x = lo.x() + (row % 2 ? 0.5 * h : 0.0); x <= hi.x(); x += h) {
      const Point q(x + jitter(rng), y + jitter(rng));
      if (admissible(q, keep_out)) lattice.push_back(q);
    }
  }

  const int nb = int(outer.size() + inner.size());
  auto assemble_points = [&]() {
    std::vector<Point> pts = outer;
    pts.insert(pts.end(), inner.begin(), inner.end());
    pts.insert(pts.end(), lattice.begin(), lattice.end());
    return pts;
  };
  auto triangulate = [&](const std::vector<Point>& pts) {
    std::vector<std::array<int, 3>> kept;
    for (const auto& tr : detail::delaunay_triangulate(pts)) {
      const Point c = (pts[tr[0]] + pts[tr[1]] + pts[tr[2]]) / 3.0;
      if (inside_ring(outer, c) && !inside_ring(inner, c)) kept.push_back(tr);
    }
    return kept;
  };

  std::vector<Point> pts = assemble_points();
  auto tris = triangulate(pts);
  // A few Laplacian smoothing sweeps on lattice vertices improve the band
  // between the boundary rings and the lattice.
  for (int sweep = 0; sweep < 3; ++sweep) {
    std::vector<Point> sum(pts.size(), Point::Zero());
    std::vector<int> count(pts.size(), 0);
    for (const auto& tr : tris)
      for (int i = 0; i < 3; ++i)
        for (int j = 1; j < 3; ++j) {
          sum[tr[i]] += pts[tr[(i + j) % 3]];
          ++count[tr[i]];
        }
    for (std::size_t i = 0; i < lattice.size(); ++i) {
      const int id = nb + int(i);
      if (count[id] == 0) continue;
      const Point cand = sum[id] / count[id];
      if (admissible(cand, smooth_keep_out)) lattice[i] = cand;
    }
    pts = assemble_points();
    tris = triangulate(pts);
  }

  UnfittedMesh mesh = mesh_from_triangulation(pts, tris);

  // The boundary must consist exactly of the ring chords.
  std::map<std::pair<int, int>, int> edge_id;
  for (int e = 0; e < mesh.num_edges(); ++e) edge_id[{mesh.edges[e].vertices[0], mesh.edges[e].vertices[1]}] = e;
  auto check_ring = [&](int offset, int count) {
    for (int i = 0; i < count; ++i) {
      const int a = offset + i, b = offset + (i + 1) % count;
      auto it = edge_id.find({std::min(a, b), std::max(a, b)});
      if (it == edge_id.end() || !mesh.edges[it->second].is_boundary()) {
        std::ostringstream msg;
        msg << "boundary chord (" << a << ", " << b << ") missing from the triangulation";
        throw MeshingError(msg.str());
      }
    }
  };
  check_ring(0, int(outer.size()));
  check_ring(int(outer.size()), int(inner.size()));
  if (int(mesh.boundary_edges.size()) != nb) throw MeshingError("triangulation has spurious boundary edges");

  for (int t = 0; t < mesh.num_elements(); ++t) {
    const double ratio = mesh.shape_ratio(t);
    if (ratio > regularity_bound) {
      std::ostringstream msg;
      msg << "element " << t << " has shape ratio " << ratio << " above bound " << regularity_bound;
      throw MeshingError(msg.str());
    }
  }
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Point& x = mesh.vertices[v];
    if (!gamma.contains(x) || gamma0.contains(x) || gamma.distance(x) <= 0.0 || gamma0.distance(x) <= 0.0)
      throw MeshingError("vertex " + std::to_string(v) + " is not strictly inside the domain");
  }

  classify_boundary_edges(mesh, gamma, gamma0);
  double c = 0.0;
  for (int e : mesh.boundary_edges) {
    const auto& ed = mesh.edges[e];
    const Point a = mesh.vertices[ed.vertices[0]], b = mesh.vertices[ed.vertices[1]];
    const double ht = mesh.element_diameter[ed.elements[0]];
    for (const Point& x : {a, b, Point(0.5 * (a + b))})
      c = std::max(c, std::min(gamma.distance(x), gamma0.distance(x)) / ht);
  }
  mesh.proximity_constant = c;
  return mesh;
}

FittedSquareAnnulus build_fitted_square_annulus(double outer, double inner, int cells) {
  if (!(outer > inner && inner > 0.0) || cells < 2)
    throw GeometryInfeasibleError("square annulus needs 0 < inner < outer and at least two cells");
  const double hs = 2.0 * outer / cells;
  const double hole = (outer - inner) / hs;
  if (std::abs(hole - std::round(hole)) > 1e-9 || std::round(hole) < 1.0)
    throw GeometryInfeasibleError("inner square does not align with the grid");
  std::vector<int> id((cells + 1) * (cells + 1), -1);
  std::vector<Point> verts;
  std::vector<std::array<int, 3>> tris;
  auto node = [&](int i, int j) {
    int& k = id[j * (cells + 1) + i];
    if (k < 0) {
      k = int(verts.size());
      verts.emplace_back(-outer + i * hs, -outer + j * hs);
    }
    return k;
  };
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      const Point c(-outer + (i + 0.5) * hs, -outer + (j + 0.5) * hs);
      if (std::abs(c.x()) < inner && std::abs(c.y()) < inner) continue;
      const int a = node(i, j), b = node(i + 1, j), d = node(i + 1, j + 1), e = node(i, j + 1);
      if ((i + j) % 2 == 0) {
        tris.push_back({a, b, d});
        tris.push_back({a, d, e});
      } else {
        tris.push_back({a, b, e});
        tris.push_back({b, d, e});
      }
    }
  }
  FittedSquareAnnulus out{
      mesh_from_triangulation(std::move(verts), std::move(tris)),
      Curve::polygon({Point(-outer, -outer), Point(outer, -outer), Point(outer, outer), Point(-outer, outer)}),
      Curve::polygon({Point(-inner, -inner), Point(inner, -inner), Point(inner, inner), Point(-inner, inner)})};
  out.mesh.fitted = true;
  classify_boundary_edges(out.mesh, out.gamma, out.gamma0);
  return out;
}

void write_mesh(std::ostream& out, const UnfittedMesh& mesh) {
  out << "vertices " << mesh.vertices.size() << " / elements " << mesh.elements.size() << " / boundary "
      << mesh.boundary_edges.size() << '\n';
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << '\n';
  for (const auto& e : mesh.elements) out << e[0] << ' ' << e[1] << ' ' << e[2] << '\n';
  for (std::size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
    const int tag = mesh.boundary_tags.empty() ? 0 : int(mesh.boundary_tags[i]);
    out << mesh.boundary_edges[i] << ' ' << tag << '\n';
  }
}

UnfittedMesh read_mesh(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty mesh file");
  std::istringstream header(line);
  std::string w1, s1, w2, s2, w3;
  std::size_t nv = 0, ne = 0, nbnd = 0;
  if (!(header >> w1 >> nv >> s1 >> w2 >> ne >> s2 >> w3 >> nbnd) || w1 != "vertices" || w2 != "elements" ||
      w3 != "boundary")
    throw FormatError("malformed mesh header: " + line);
  std::vector<Point> verts(nv);
  for (auto& v : verts)
    if (!(in >> v.x() >> v.y())) throw FormatError("truncated vertex block");
  std::vector<std::array<int, 3>> elems(ne);
  for (auto& e : elems)
    if (!(in >> e[0] >> e[1] >> e[2])) throw FormatError("truncated element block");
  UnfittedMesh mesh = mesh_from_triangulation(std::move(verts), std::move(elems));
  if (nbnd != mesh.boundary_edges.size()) throw FormatError("boundary edge count does not match the elements");
  mesh.boundary_tags.assign(nbnd, BoundaryTag::gamma);
  for (std::size_t i = 0; i < nbnd; ++i) {
    int edge = 0, tag = 0;
    if (!(in >> edge >> tag)) throw FormatError("truncated boundary block");
    if (edge < 0 || edge >= mesh.num_edges() || mesh.boundary_position[edge] < 0 || (tag != 0 && tag != 1))
      throw FormatError("invalid boundary row " + std::to_string(i));
    mesh.boundary_tags[mesh.boundary_position[edge]] = BoundaryTag(tag);
  }
  return mesh;
}

}  // namespace hdgbem::geometry
