#include "delaunay.hpp"

#include <algorithm>
#include <cmath>

#include "hdgbem/errors.hpp"

namespace hdgbem::geometry::detail {

namespace {

struct Tri {
  std::array<int, 3> v;
  std::array<int, 3> nb;  // nb[i] is across the edge opposite v[i]
  bool alive = true;
};

double orient(const Point& a, const Point& b, const Point& c) { return cross2(b - a, c - a); }

// Positive when d lies inside the circumcircle of the counterclockwise triangle abc.
double incircle(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

}  // namespace

std::vector<std::array<int, 3>> delaunay_triangulate(const std::vector<Point>& input) {
  const int n = int(input.size());
  if (n < 3) throw MeshingError("triangulation needs at least three points");
  std::vector<Point> p = input;
  Point lo = p[0], hi = p[0];
  for (const auto& q : p) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  const Point mid = 0.5 * (lo + hi);
  const double span = std::max((hi - lo).maxCoeff(), 1e-12);
  p.push_back(mid + Point(-40.0 * span, -30.0 * span));
  p.push_back(mid + Point(40.0 * span, -30.0 * span));
  p.push_back(mid + Point(0.0, 40.0 * span));

  std::vector<Tri> tris;
  tris.reserve(4 * n + 8);
  tris.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});
  std::vector<char> mark(1, 0);
  std::vector<int> cavity, stack;
  struct Rim {
    int a, b, outside, created;
  };
  std::vector<Rim> rim;
  int last = 0;

  for (int pi = 0; pi < n; ++pi) {
    const Point& x = p[pi];
    // Walk towards the point.
    int t = last;
    if (!tris[t].alive) t = int(tris.size()) - 1;
    for (std::size_t steps = 0;; ++steps) {
      bool moved = false;
      for (int k = 0; k < 3; ++k) {
        const int i = (k + int(steps)) % 3;
        const Tri& tr = tris[t];
        if (orient(p[tr.v[(i + 1) % 3]], p[tr.v[(i + 2) % 3]], x) < 0.0 && tr.nb[i] >= 0) {
          t = tr.nb[i];
          moved = true;
          break;
        }
      }
      if (!moved) break;
      if (steps > tris.size()) throw MeshingError("point location failed during triangulation");
    }

    // Grow the cavity of triangles whose circumcircle contains x.
    cavity.clear();
    stack.assign(1, t);
    mark.resize(tris.size(), 0);
    mark[t] = 1;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      cavity.push_back(c);
      for (int i = 0; i < 3; ++i) {
        const int nb = tris[c].nb[i];
        if (nb < 0 || mark[nb]) continue;
        const Tri& o = tris[nb];
        if (incircle(p[o.v[0]], p[o.v[1]], p[o.v[2]], x) > 0.0) {
          mark[nb] = 1;
          stack.push_back(nb);
        }
      }
    }

    rim.clear();
    for (int c : cavity) {
      for (int i = 0; i < 3; ++i) {
        const int nb = tris[c].nb[i];
        if (nb >= 0 && mark[nb]) continue;
        const int a = tris[c].v[(i + 1) % 3], b = tris[c].v[(i + 2) % 3];
        if (orient(p[a], p[b], x) <= 0.0) throw MeshingError("degenerate cavity during triangulation");
        rim.push_back({a, b, nb, -1});
      }
    }
    for (int c : cavity) {
      tris[c].alive = false;
      mark[c] = 0;
    }
    for (auto& r : rim) {
      r.created = int(tris.size());
      tris.push_back({{pi, r.a, r.b}, {r.outside, -1, -1}, true});
      if (r.outside >= 0) {
        Tri& o = tris[r.outside];
        for (int j = 0; j < 3; ++j) {
          const int oa = o.v[(j + 1) % 3], ob = o.v[(j + 2) % 3];
          if (oa == r.b && ob == r.a) o.nb[j] = r.created;
        }
      }
    }
    for (auto& r : rim) {
      Tri& tr = tris[r.created];
      for (const auto& s : rim) {
        if (s.b == r.a) tr.nb[2] = s.created;  // edge (pi, a)
        if (s.a == r.b) tr.nb[1] = s.created;  // edge (b, pi)
      }
    }
    last = int(tris.size()) - 1;
  }

  std::vector<std::array<int, 3>> out;
  for (const auto& tr : tris) {
    if (!tr.alive) continue;
    if (tr.v[0] >= n || tr.v[1] >= n || tr.v[2] >= n) continue;
    out.push_back(tr.v);
  }
  return out;
}

}  // namespace hdgbem::geometry::detail
