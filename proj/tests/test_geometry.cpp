#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hdgbem/errors.hpp"
#include "hdgbem/geometry/boundary_map.hpp"
#include "support.hpp"

using namespace hdgbem;
using namespace hdgbem::geometry;
using hdgbem::test::annulus;

TEST_CASE("circle geometry") {
  const auto c = Curve::circle(Point(0.3, -0.2), 2.0);
  CHECK(c.length() == doctest::Approx(4.0 * kPi));
  CHECK(c.enclosed_area() == doctest::Approx(4.0 * kPi));
  const Point n = c.outward_normal(0.7);
  CHECK((n - Point(std::cos(0.7), std::sin(0.7))).norm() < 1e-14);
  const auto p = c.closest_point(Point(3.3, -0.2));
  CHECK(p.s == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(p.distance == doctest::Approx(1.0));
  CHECK(c.contains(Point(0.3, 1.7)));
  CHECK_FALSE(c.contains(Point(0.3, 1.9)));
}

TEST_CASE("ellipse matches its closed-form area and is counterclockwise") {
  const auto e = Curve::ellipse(Point::Zero(), 1.3, 0.8);
  CHECK(e.enclosed_area() == doctest::Approx(kPi * 1.3 * 0.8).epsilon(1e-12));
  for (double s : {0.0, 1.0, 2.5, 4.0}) {
    CHECK(e.outward_normal(s).dot(e.position(s)) > 0.0);
    // Closest point of an outward offset lands back on s.
    const Point x = e.position(s) + 0.05 * e.outward_normal(s);
    const auto p = e.closest_point(x);
    CHECK(std::abs(wrap_angle(p.s - s)) < 1e-9);
    CHECK(p.distance == doctest::Approx(0.05).epsilon(1e-9));
  }
}

TEST_CASE("polygon is reoriented counterclockwise and closest points are exact") {
  const auto sq = Curve::polygon({{1, 1}, {-1, 1}, {-1, -1}, {1, -1}});
  CHECK(sq.length() == doctest::Approx(8.0));
  CHECK(sq.enclosed_area() == doctest::Approx(4.0));
  CHECK(sq.contains(Point(0.2, 0.9)));
  const auto p = sq.closest_point(Point(1.5, 0.25));
  CHECK((p.point - Point(1.0, 0.25)).norm() < 1e-14);
}

TEST_CASE("arclength parameters are equispaced in arclength") {
  const auto e = Curve::ellipse(Point::Zero(), 1.5, 0.6);
  const auto s = e.arclength_parameters(16);
  REQUIRE(s.size() == 16);
  std::vector<double> chord;
  for (int i = 0; i < 16; ++i) chord.push_back((e.position(s[(i + 1) % 16]) - e.position(s[i])).norm());
  // Equal arcs give nearly equal chords on this smooth curve.
  const auto [lo, hi] = std::minmax_element(chord.begin(), chord.end());
  CHECK(*hi / *lo < 1.05);
}

TEST_CASE("edge classification follows the distance rule with ties toward the outer curve") {
  const auto& g = test::unit_circle();
  const auto& g0 = test::inner_circle();
  auto edge_at = [&](double r) {
    return classify_edge(Point(r, -0.01), Point(r, 0.01), g, g0);
  };
  CHECK(edge_at(0.95) == BoundaryTag::gamma);
  CHECK(edge_at(0.55) == BoundaryTag::gamma0);
  CHECK(classify_edge(Point(0.75, 0.0), Point(0.0, 0.75), g, g0) == BoundaryTag::gamma0);
  // Exactly equidistant: midpoint at radius 0.75 along a radial edge.
  CHECK(classify_edge(Point(0.7, 0.0), Point(0.8, 0.0), g, g0) == BoundaryTag::gamma);
}

TEST_CASE("annulus mesh satisfies the structural invariants") {
  const auto& mesh = annulus(0.1);
  for (const auto& v : mesh.vertices) {
    CHECK(v.norm() > 0.5);
    CHECK(v.norm() < 1.0);
  }
  for (int t = 0; t < mesh.num_elements(); ++t) {
    CHECK(mesh.element_area(t) > 0.0);
    CHECK(mesh.shape_ratio(t) <= 8.0);
  }
  int boundary = 0;
  for (const auto& e : mesh.edges) boundary += e.is_boundary();
  CHECK(boundary == int(mesh.boundary_edges.size()));
  CHECK(mesh.count_tag(BoundaryTag::gamma) + mesh.count_tag(BoundaryTag::gamma0) == boundary);
  for (std::size_t i = 1; i < mesh.edges.size(); ++i) CHECK(mesh.edges[i - 1].vertices < mesh.edges[i].vertices);
  // Local proximity: boundary vertices sit within C h_T of a curve.
  const auto& g = test::unit_circle();
  const auto& g0 = test::inner_circle();
  for (int e : mesh.boundary_edges) {
    const int t = mesh.edges[e].elements[0];
    for (int v : mesh.edges[e].vertices) {
      const Point& x = mesh.vertices[v];
      const double d = std::min(g.distance(x), g0.distance(x));
      CHECK(d <= mesh.proximity_constant * mesh.element_diameter[t] + 1e-14);
    }
  }
}

TEST_CASE("a gap thinner than one element is rejected") {
  CHECK_THROWS_AS(build_annulus_mesh(test::unit_circle(), Curve::circle(Point::Zero(), 0.9), 0.5, 8.0),
                  GeometryInfeasibleError);
}

TEST_CASE("mesh files round-trip") {
  const auto& mesh = annulus(0.2);
  std::stringstream buffer;
  write_mesh(buffer, mesh);
  const std::string first = buffer.str();
  CHECK(first.rfind("vertices " + std::to_string(mesh.vertices.size()), 0) == 0);
  const auto back = read_mesh(buffer);
  CHECK(back.num_elements() == mesh.num_elements());
  CHECK(back.boundary_tags == mesh.boundary_tags);
  std::stringstream again;
  write_mesh(again, back);
  CHECK(again.str() == first);
  std::stringstream broken("vertices 3 / elements 1 / boundary 3\n0 0\n1 0\n");
  CHECK_THROWS_AS(read_mesh(broken), FormatError);
}

TEST_CASE("radial boundary map on the unit circle") {
  const auto& mesh = annulus(0.1);
  const auto bmap = build_boundary_map(mesh, test::unit_circle(), test::inner_circle());
  REQUIRE(bmap.edges.size() == mesh.boundary_edges.size());
  for (const auto& em : bmap.edges) {
    for (std::size_t i = 0; i < em.x.size(); ++i) {
      const Point& x = em.x[i];
      const double r = em.tag == BoundaryTag::gamma ? 1.0 : 0.5;
      CHECK((em.xbar[i] - r * x.normalized()).norm() < 1e-13);
      CHECK((x + em.l[i] * em.t[i] - em.xbar[i]).norm() < 1e-12 * 2.0);
      CHECK(em.t[i].norm() == doctest::Approx(1.0));
      CHECK(em.t[i].dot(em.nu_h) >= 0.1);
    }
  }
}

TEST_CASE("radial map reproduces the hand examples") {
  // One triangle whose right edge sits on x = 0.9; the middle map node is (0.9, 0).
  auto mesh = mesh_from_triangulation({{0.9, -0.05}, {0.9, 0.05}, {0.8, 0.0}}, {{0, 1, 2}});
  mesh.boundary_tags.assign(mesh.boundary_edges.size(), BoundaryTag::gamma);
  BoundaryMapOptions opt;
  opt.strategy = MapStrategy::radial;
  opt.nodes_per_edge = 5;
  opt.tangency_floor = -1.0;
  const auto bmap = build_boundary_map(mesh, test::unit_circle(), test::inner_circle(), opt);
  int checked = 0;
  for (const auto& em : bmap.edges) {
    if (std::abs(em.a.x() - 0.9) > 1e-15 || std::abs(em.b.x() - 0.9) > 1e-15) continue;
    CHECK((em.x[2] - Point(0.9, 0.0)).norm() < 1e-15);
    CHECK((em.xbar[2] - Point(1.0, 0.0)).norm() < 1e-15);
    CHECK(em.l[2] == doctest::Approx(0.1));
    CHECK((em.t[2] - Point(1.0, 0.0)).norm() < 1e-15);
    ++checked;
  }
  CHECK(checked == 1);
  const auto& g = test::unit_circle();
  CHECK((g.closest_point(Point(0.0, 0.95)).point - Point(0.0, 1.0)).norm() < 1e-15);
  CHECK(g.distance(Point(0.0, 0.95)) == doctest::Approx(0.05));
}

TEST_CASE("radial strategy is refused on non-circular curves") {
  BoundaryMapOptions opt;
  opt.strategy = MapStrategy::radial;
  const auto e = Curve::ellipse(Point::Zero(), 1.0, 0.99);
  const auto mesh = build_annulus_mesh(e, test::inner_circle(), 0.1, 8.0);
  CHECK_THROWS_AS(build_boundary_map(mesh, e, test::inner_circle(), opt), MapConstructionError);
}

TEST_CASE("patch areas complete the annulus") {
  for (double h : {0.2, 0.1, 0.05}) {
    const auto& mesh = annulus(h);
    const auto bmap = build_boundary_map(mesh, test::unit_circle(), test::inner_circle());
    const auto patches = build_extension_patches(mesh, bmap, test::unit_circle(), test::inner_circle());
    REQUIRE(patches.size() == mesh.boundary_edges.size());
    double total = mesh.area();
    for (const auto& p : patches) {
      double sum = 0.0;
      for (double w : p.weights) sum += w;
      CHECK(sum == doctest::Approx(p.area).epsilon(1e-12));
      CHECK(std::abs(p.area - p.boundary_area) <= 1e-8 * p.area);
      total += p.area;
    }
    CHECK(std::abs(total - kPi * 0.75) < 1e-10);
  }
}

TEST_CASE("patch area is the path-length trapezoid up to the circular segment") {
  const auto& mesh = annulus(0.1);
  const auto bmap = build_boundary_map(mesh, test::unit_circle(), test::inner_circle());
  const auto patches = build_extension_patches(mesh, bmap, test::unit_circle(), test::inner_circle());
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const auto& em = bmap.edges[i];
    const double radius = em.tag == BoundaryTag::gamma ? 1.0 : 0.5;
    const double trapezoid = 0.5 * em.length * (em.l_a + em.l_b);
    const double segment = std::pow(em.length, 3) / (12.0 * radius);
    CHECK(std::abs(patches[i].area - trapezoid) <= 2.0 * segment + 1e-14);
  }
}

TEST_CASE("fitted square annulus has zero proximity and empty patches") {
  const auto fa = build_fitted_square_annulus(1.0, 0.5, 8);
  const auto bmap = build_boundary_map(fa.mesh, fa.gamma, fa.gamma0);
  const auto prox = proximity_parameter(fa.mesh, bmap);
  CHECK(prox.R_h == 0.0);
  for (const auto& em : bmap.edges)
    for (std::size_t i = 0; i < em.x.size(); ++i) {
      CHECK(em.l[i] == 0.0);
      CHECK((em.t[i] - em.nu_h).norm() == 0.0);
    }
  const auto patches = build_extension_patches(fa.mesh, bmap, fa.gamma, fa.gamma0);
  for (const auto& p : patches) CHECK(p.area < 1e-14);
  CHECK(fa.mesh.area() == doctest::Approx(3.0));
}

TEST_CASE("proximity parameter and normal deviation decrease under refinement") {
  double last_r = 1e9, last_n = 1e9;
  for (double h : {0.2, 0.1, 0.05, 0.025}) {
    const auto& mesh = annulus(h);
    const auto bmap = build_boundary_map(mesh, test::unit_circle(), test::inner_circle());
    const auto prox = proximity_parameter(mesh, bmap);
    CHECK(prox.R_h < last_r);
    CHECK(prox.normal_deviation < last_n);
    last_r = prox.R_h;
    last_n = prox.normal_deviation;
  }
}

TEST_CASE("locate_patch finds the patch holding a parameter") {
  const auto& mesh = annulus(0.1);
  const auto bmap = build_boundary_map(mesh, test::unit_circle(), test::inner_circle());
  const auto patches = build_extension_patches(mesh, bmap, test::unit_circle(), test::inner_circle());
  for (double s = 0.0; s < kTwoPi; s += 0.1) {
    const int i = locate_patch(patches, BoundaryTag::gamma, s);
    REQUIRE(i >= 0);
    const auto& p = patches[i];
    const double u = wrap_angle(s - p.s_begin) / (p.s_end - p.s_begin);
    CHECK(u >= -1e-9);
    CHECK(u <= 1.0 + 1e-9);
  }
}
