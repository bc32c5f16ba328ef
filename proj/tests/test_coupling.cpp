#include <doctest.h>

#include <cmath>

#include "hdgbem/coupling/coupling.hpp"
#include "hdgbem/harness/manufactured.hpp"
#include "hdgbem/hdg/diagnostics.hpp"
#include "support.hpp"

using namespace hdgbem;
using namespace hdgbem::coupling;
using bem::TrigPolynomial;

namespace {

const CouplingBundle& bundle(double h, int k = 1) {
  static std::map<std::pair<double, int>, CouplingBundle> cache;
  const auto key = std::make_pair(h, k);
  auto it = cache.find(key);
  if (it == cache.end()) {
    BundleOptions o;
    o.k = k;
    o.n = 32;
    it = cache.emplace(key, make_bundle(test::unit_circle(), test::inner_circle(), test::annulus(h), o)).first;
  }
  return it->second;
}

InteriorData data_of(const harness::ManufacturedCase& c) { return {c.f, c.boundary_datum()}; }

TrigPolynomial from_function(int n, const std::function<double(double)>& f) {
  const auto t = TrigPolynomial::nodes(n);
  VectorX s(2 * n);
  for (int j = 0; j < 2 * n; ++j) s[j] = f(t[j]);
  return TrigPolynomial::interpolate(s);
}

double coefficient_gap(const TrigPolynomial& a, const TrigPolynomial& b) {
  return (a.coefficients() - b.coefficients()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("dtn step with zero data gives zero density") {
  const auto& b = bundle(0.2);
  const auto r = dtn_step(b, InteriorData{}, TrigPolynomial(b.n()));
  CHECK(r.lambda.coefficients().norm() == 0.0);
  CHECK(r.mean_flux == 0.0);
}

TEST_CASE("dtn step at the dipole fixed point returns the exterior normal derivative") {
  const auto& b = bundle(0.05);
  const auto c = harness::manufactured_case("dipole");
  const auto r = dtn_step(b, data_of(c), from_function(b.n(), [](double t) { return std::cos(t); }));
  // lambda = du/dr of cos t / r at r = 1, i.e. -cos t (the flux q.n is +cos t).
  CHECK(std::abs(r.lambda.cos_coefficient(1) + 1.0) < 5e-3);
  CHECK(std::abs(r.mean_flux) < 1e-3);
  CHECK(r.residual < 1e-10);
}

TEST_CASE("a constant normal flux projects to zero density") {
  const auto& b = bundle(0.1);
  const auto& sys = *b.system;
  // q = c x has q.n = c on the unit circle; it lies in every element's P_1.
  hdg::DGField field = hdg::solve_interior(sys, nullptr, nullptr, nullptr);
  const int np = sys.np();
  const double c = 2.5;
  for (int t = 0; t < sys.mesh.num_elements(); ++t) {
    const auto& basis = (*field.basis)[t];
    // Fit q_x = c x and q_y = c y through the orthonormal basis by least squares.
    MatrixX a(6, np);
    VectorX bx(6), by(6);
    const std::array<Point, 6> refs{Point(0, 0), Point(1, 0), Point(0, 1), Point(0.5, 0), Point(0.5, 0.5), Point(0, 0.5)};
    for (int i = 0; i < 6; ++i) {
      const Point x = basis.map(refs[i]);
      a.row(i) = basis.values(x).transpose();
      bx[i] = c * x.x();
      by[i] = c * x.y();
    }
    field.q.segment(2 * np * t, np) = a.colPivHouseholderQr().solve(bx);
    field.q.segment(2 * np * t + np, np) = a.colPivHouseholderQr().solve(by);
  }
  const VectorX samples = b.flux_sampler * field.q;
  CHECK((samples.array() - c).abs().maxCoeff() < 1e-12);
  CHECK(bem::project_mean_zero(b.ops.weight, samples).coefficients().norm() < 1e-12);
}

TEST_CASE("ntd step examples") {
  const auto& ops = bundle(0.2).ops;
  const int n = ops.n;
  const auto zero = ntd_step(ops, TrigPolynomial(n));
  CHECK(zero.g.coefficients().norm() == 0.0);
  CHECK(zero.u_inf == 0.0);
  const auto r1 = ntd_step(ops, bem::project_mean_zero(ops.weight, from_function(n, [](double t) { return std::cos(t); })));
  CHECK(coefficient_gap(r1.g, from_function(n, [](double t) { return -std::cos(t); })) < 1e-14);
  const auto r2 =
      ntd_step(ops, bem::project_mean_zero(ops.weight, from_function(n, [](double t) { return std::sin(2 * t); })));
  CHECK(coefficient_gap(r2.g, from_function(n, [](double t) { return -std::sin(2 * t) / 2; })) < 1e-14);
}

TEST_CASE("relax update examples") {
  const int n = 8;
  const auto g = from_function(n, [](double t) { return std::cos(t); });
  const TrigPolynomial zero(n);
  CHECK(coefficient_gap(relax_update(zero, g, 1.0), g) == 0.0);
  CHECK(coefficient_gap(relax_update(g, zero, 0.0), g) == 0.0);
  CHECK(relax_update(zero, g, 0.5).cos_coefficient(1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(relax_update(TrigPolynomial(4), g, 0.5), DimensionError);
}

TEST_CASE("configuration validation") {
  CouplingConfig c;
  CHECK_NOTHROW(validate(c));
  c.omega = 0.0;
  CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("coupling.omega"), ConfigError);
  c.omega = 1.2;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.omega = 0.5;
  c.tolerance = -1.0;
  CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("coupling.tol"), ConfigError);
}

TEST_CASE("zero data converges in one iteration") {
  const auto& b = bundle(0.2);
  const auto st = run_fixed_point(b, InteriorData{}, CouplingConfig{});
  CHECK(st.converged);
  CHECK(st.iterations == 1);
  CHECK(st.trace().coefficients().norm() == 0.0);
  CHECK(st.u_inf == 0.0);
}

TEST_CASE("dipole iteration contracts geometrically and reaches cos t") {
  const auto& b = bundle(0.05);
  const auto c = harness::manufactured_case("dipole");
  CouplingConfig cfg;
  cfg.omega = 0.5;
  cfg.tolerance = 1e-10;
  const auto st = run_fixed_point(b, data_of(c), cfg);
  CHECK(st.converged);
  for (double v : st.history) CHECK(v > 0.0);
  const double ratio = estimate_contraction(st.history);
  CHECK(ratio < 0.6);
  for (std::size_t i = 3; i < st.history.size(); ++i) CHECK(st.history[i] < st.history[i - 1]);
  CHECK(std::abs(st.g.cos_coefficient(1) - 1.0) < 2e-3);
  CHECK(interface_l2_norm(b.gamma, st.g) == doctest::Approx(std::sqrt(kPi)).epsilon(2e-3));
  for (std::size_t i = 0; i < st.lambda_mean.size(); ++i) CHECK(st.lambda_mean[i] <= 1e-12 * st.lambda_norm[i]);
  CHECK(hdg::conservation_residuals(*b.system, st.field, c.f).maxCoeff() < 1e-10);
}

TEST_CASE("the converged trace does not depend on omega") {
  const auto& b = bundle(0.1);
  const auto c = harness::manufactured_case("dipole-plus-constant");
  CouplingConfig cfg;
  cfg.tolerance = 1e-11;
  cfg.omega = 0.3;
  const auto a = run_fixed_point(b, data_of(c), cfg);
  cfg.omega = 0.55;
  const auto d = run_fixed_point(b, data_of(c), cfg);
  cfg.omega = 0.5;
  cfg.aitken = true;
  const auto e = run_fixed_point(b, data_of(c), cfg);
  auto diff = [&](const CouplingState& x, const CouplingState& y) {
    TrigPolynomial p = x.trace();
    p.coefficients() -= y.trace().coefficients();
    return interface_l2_norm(b.gamma, p);
  };
  // The stopping test is relative to the trace norm, and so is the agreement.
  const double scale = std::max(1.0, interface_l2_norm(b.gamma, a.trace()));
  CHECK(diff(a, d) < 10 * 1e-11 * scale);
  CHECK(diff(a, e) < 10 * 1e-11 * scale);
  CHECK(std::abs(a.u_inf - d.u_inf) < 1e-9);
  CHECK(coefficient_gap(a.lambda, d.lambda) < 1e-9);
  CHECK(e.iterations <= d.iterations + 5);
}

TEST_CASE("unrelaxed iteration on this annulus diverges and reports its history") {
  const auto& b = bundle(0.1);
  const auto c = harness::manufactured_case("dipole");
  CouplingConfig cfg;
  cfg.omega = 1.0;
  cfg.max_iterations = 300;
  try {
    run_fixed_point(b, data_of(c), cfg);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK_FALSE(e.state().converged);
    CHECK(e.state().history.size() >= 3);
    CHECK(estimate_contraction(e.state().history) > 1.0);
  }
  cfg.omega = 0.5;
  cfg.max_iterations = 3;
  CHECK_THROWS_AS(run_fixed_point(b, data_of(c), cfg), DivergenceError);
}

TEST_CASE("contraction estimate") {
  CHECK(estimate_contraction({1.0, 0.5, 0.25, 0.125}) == doctest::Approx(0.5));
  CHECK(estimate_contraction({1.0, 1.0, 1.0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(estimate_contraction({1.0, 0.5}), EstimationError);
}

TEST_CASE("ratios across an omega grid are finite and some are below one") {
  const auto& b = bundle(0.1);
  const auto c = harness::manufactured_case("dipole");
  bool below = false;
  for (double w : {0.2, 0.4, 0.6}) {
    CouplingConfig cfg;
    cfg.omega = w;
    const auto st = run_fixed_point(b, data_of(c), cfg);
    const double r = estimate_contraction(st.history);
    CHECK(std::isfinite(r));
    CHECK(r > 0.0);
    below = below || r < 1.0;
  }
  CHECK(below);
}

TEST_CASE("monolithic oracle") {
  SUBCASE("zero data") {
    const auto m = monolithic_solve(bundle(0.2), InteriorData{});
    CHECK(m.field.q.norm() == 0.0);
    CHECK(m.g.coefficients().norm() == 0.0);
    CHECK(m.constant == 0.0);
  }
  SUBCASE("matches the fixed-point limit") {
    const auto& b = bundle(0.1);
    const auto c = harness::manufactured_case("dipole-plus-constant");
    CouplingConfig cfg;
    cfg.tolerance = 1e-13;
    const auto st = run_fixed_point(b, data_of(c), cfg);
    const auto m = monolithic_solve(b, data_of(c));
    CHECK((m.field.q - st.field.q).norm() <= 1e-8 * st.field.q.norm());
    CHECK((m.field.u - st.field.u).norm() <= 1e-8 * st.field.u.norm());
    CHECK(coefficient_gap(m.trace(), st.trace()) < 1e-8);
    CHECK(std::abs(m.u_inf - st.u_inf) < 1e-8 * std::abs(st.u_inf));
  }
  SUBCASE("constant solution is exact through the coupled system") {
    const auto& b = bundle(0.1, 2);
    const auto c = harness::manufactured_case("constant", 1, 2.5);
    const auto m = monolithic_solve(b, data_of(c));
    const auto e = hdg::l2_errors(*b.system, m.field, [&](const Point& x) { return c.q(x); },
                                  [&](const Point& x) { return c.u(x); });
    CHECK(e.q < 1e-9);
    CHECK(e.u < 1e-9);
    CHECK(std::abs(m.u_inf - 2.5) < 1e-9);
  }
}

TEST_CASE("mean flux slope is the response to a unit datum") {
  const auto& b = bundle(0.2);
  TrigPolynomial one(b.n());
  one.coefficients()[0] = 1.0;
  const auto r = dtn_step(b, InteriorData{}, one);
  CHECK(r.mean_flux == doctest::Approx(b.mean_flux_slope));
  // u = 1 on the outer circle and 0 on the inner one gives the log profile,
  // with outward flux -1/(r log 2) at r = 1.
  CHECK(b.mean_flux_slope == doctest::Approx(-1.0 / std::log(2.0)).epsilon(0.05));
}

TEST_CASE("iteration on an ellipse keeps lambda mean-zero in arclength") {
  BundleOptions o;
  o.k = 1;
  o.n = 24;
  const auto e = geometry::Curve::ellipse(Point::Zero(), 1.2, 0.9);
  const auto mesh = geometry::build_annulus_mesh(e, test::inner_circle(), 0.1, 8.0);
  const auto b = make_bundle(e, test::inner_circle(), mesh, o);
  auto c = harness::manufactured_case("dipole-plus-constant");
  c.gamma = e;
  CouplingConfig cfg;
  cfg.omega = 0.4;
  cfg.max_iterations = 300;
  const auto st = run_fixed_point(b, data_of(c), cfg);
  CHECK(st.converged);
  for (std::size_t i = 0; i < st.lambda_mean.size(); ++i) CHECK(st.lambda_mean[i] <= 1e-12 * st.lambda_norm[i]);
  CHECK(std::abs(st.u_inf - 3.0) < 1e-3);
}
