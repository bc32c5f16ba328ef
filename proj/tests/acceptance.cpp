// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hdgbem/bem/layer.hpp"
#include "hdgbem/coupling/coupling.hpp"
#include "hdgbem/geometry/mesh.hpp"
#include "hdgbem/harness/study.hpp"
#include "hdgbem/quadrature.hpp"
#include "hdgbem/hdg/diagnostics.hpp"

using namespace hdgbem;
using bem::TrigPolynomial;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("%s [%d] %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Worst values seen over every run, for the conservation and mean-zero checks.
struct RunLog {
  double conservation = 0.0;
  double lambda_mean = 0.0;
  int converged_runs = 0;
  int runs = 0;

  void add_state(const coupling::CouplingState& st) {
    ++runs;
    for (std::size_t i = 0; i < st.lambda_mean.size(); ++i) {
      const double r = st.lambda_norm[i] > 0.0 ? st.lambda_mean[i] / st.lambda_norm[i] : st.lambda_mean[i];
      lambda_mean = std::max(lambda_mean, r);
    }
  }
  void add_converged(const coupling::CouplingBundle& b, const coupling::CouplingState& st,
                     const hdg::SourceFunction& f) {
    add_state(st);
    ++converged_runs;
    conservation = std::max(conservation, hdg::conservation_residuals(*b.system, st.field, f).maxCoeff());
  }
  void add_study(const harness::StudyReport& r) {
    for (const auto& l : r.levels) {
      ++runs;
      if (l.failed) continue;
      ++converged_runs;
      conservation = std::max(conservation, l.max_conservation);
      lambda_mean = std::max(lambda_mean, l.max_lambda_mean);
    }
  }
};

RunLog runs;

const geometry::Curve unit = geometry::Curve::circle(Point::Zero(), 1.0);
const geometry::Curve inner = geometry::Curve::circle(Point::Zero(), 0.5);

coupling::CouplingBundle bundle_on(const geometry::UnfittedMesh& mesh, int k = 1) {
  coupling::BundleOptions o;
  o.k = k;
  o.n = 32;
  o.tau = 1.0;
  return coupling::make_bundle(unit, inner, mesh, o);
}

coupling::InteriorData data_of(const harness::ManufacturedCase& c) { return {c.f, c.boundary_datum()}; }

TrigPolynomial from_function(int n, const std::function<double(double)>& f) {
  const auto t = TrigPolynomial::nodes(n);
  VectorX s(2 * n);
  for (int j = 0; j < 2 * n; ++j) s[j] = f(t[j]);
  return TrigPolynomial::interpolate(s);
}

double trace_gap(const geometry::Curve& gamma, const TrigPolynomial& a, const TrigPolynomial& b) {
  TrigPolynomial d = a;
  d.coefficients() -= b.coefficients();
  return coupling::interface_l2_norm(gamma, d);
}

void dipole_rates() {
  const auto t0 = Clock::now();
  const auto c = harness::manufactured_case("dipole");
  const std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
  bool ok = true;
  std::string detail;
  for (auto [k, bound] : {std::pair{1, 1.8}, std::pair{2, 2.7}}) {
    harness::StudyOptions o;
    o.k = k;
    o.n = 32;
    o.tau = 1.0;
    const auto r = harness::convergence_study(c, hs, o);
    runs.add_study(r);
    const auto& last = r.levels.back();
    const auto& prev = r.levels[r.levels.size() - 2];
    ok = ok && !last.failed && !prev.failed;
    for (const auto* l : {&prev, &last}) ok = ok && l->rate_q >= bound && l->rate_u >= bound;
    detail += fmt("k=%d rates q %.2f,%.2f u %.2f,%.2f; ", k, prev.rate_q, last.rate_q, prev.rate_u, last.rate_u);
  }
  const double s = seconds_since(t0);
  report(1, ok && s <= 300.0, "dipole L2 rates over the last two levels: " + detail + fmt("%.1f s", s));
}

void bem_spectral() {
  const auto t0 = Clock::now();
  const int n = 32;
  const auto ops = bem::assemble_layer_operators(unit, n);
  const auto lambda =
      bem::project_mean_zero(ops.weight, from_function(n, [](double t) { return std::cos(t) + std::sin(2 * t); }));
  const auto g = bem::solve_exterior(ops, lambda);
  double err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t = kTwoPi * i / 1000;
    err = std::max(err, std::abs(g(t) + std::cos(t) + 0.5 * std::sin(2 * t)));
  }
  const double s = seconds_since(t0);
  report(2, err <= 1e-10 && s < 1.0, fmt("circle exterior solve sup error %.2e in %.3f s", err, s));
}

void contraction_and_uniqueness() {
  const auto mesh = geometry::build_annulus_mesh(unit, inner, 0.05, 8.0);
  const auto b = bundle_on(mesh);
  const auto c = harness::manufactured_case("dipole");
  std::vector<std::pair<double, coupling::CouplingState>> converged;
  std::string detail;
  bool found = false;
  for (int i = 1; i <= 9; ++i) {
    coupling::CouplingConfig cfg;
    cfg.omega = 0.1 * i;
    cfg.tolerance = 1e-8;
    cfg.max_iterations = 100;
    try {
      auto st = coupling::run_fixed_point(b, data_of(c), cfg);
      runs.add_converged(b, st, c.f);
      const double ratio = coupling::estimate_contraction(st.history);
      detail += fmt("w=%.1f:%d it r=%.3f ", cfg.omega, st.iterations, ratio);
      if (ratio < 0.95 && st.iterations <= 100) found = true;
      converged.emplace_back(cfg.omega, std::move(st));
    } catch (const coupling::DivergenceError& e) {
      runs.add_state(e.state());
      detail += fmt("w=%.1f:no ", cfg.omega);
    }
  }
  report(3, found, "omega grid at h=0.05: " + detail);

  bool ok = converged.size() >= 2;
  double worst = 0.0;
  for (std::size_t i = 1; i < converged.size(); ++i)
    worst = std::max(worst, trace_gap(b.gamma, converged[0].second.trace(), converged[i].second.trace()));
  report(4, ok && worst <= 1e-6,
         fmt("%zu convergent omegas, largest L2 trace difference %.2e", converged.size(), worst));
}

void monolithic() {
  const auto mesh = geometry::build_annulus_mesh(unit, inner, 0.1, 8.0);
  const auto b = bundle_on(mesh);
  const auto c = harness::manufactured_case("dipole-plus-constant", 1, 3.0);
  coupling::CouplingConfig cfg;
  cfg.tolerance = 1e-12;
  cfg.max_iterations = 400;
  const auto st = coupling::run_fixed_point(b, data_of(c), cfg);
  runs.add_converged(b, st, c.f);
  const auto m = coupling::monolithic_solve(b, data_of(c));
  const double dq = (m.field.q - st.field.q).norm() / m.field.q.norm();
  const double du = (m.field.u - st.field.u).norm() / m.field.u.norm();
  const double dg = trace_gap(b.gamma, m.trace(), st.trace()) / coupling::interface_l2_norm(b.gamma, m.trace());
  const double di = std::abs(m.u_inf - st.u_inf) / std::abs(m.u_inf);
  const double worst = std::max({dq, du, dg, di});
  report(5, worst <= 1e-8 && mesh.num_elements() <= 2000,
         fmt("fixed point vs direct solve on %d elements: q %.1e u %.1e g %.1e u_inf %.1e", mesh.num_elements(), dq,
             du, dg, di));
}

void patch_test() {
  double worst = 0.0;
  bool ok = true;
  const auto fitted = geometry::build_fitted_square_annulus(1.0, 0.5, 8);
  for (int k : {1, 2}) {
    harness::StudyOptions o;
    o.k = k;
    auto c = harness::manufactured_case("polynomial-patch", k);
    const auto unfitted = geometry::build_annulus_mesh(c.gamma, c.gamma0, 0.1, 8.0);
    const auto a = harness::solve_level(c, unfitted, o);
    c.gamma = fitted.gamma;
    c.gamma0 = fitted.gamma0;
    const auto f = harness::solve_level(c, fitted.mesh, o);
    for (const auto* l : {&a, &f}) {
      ok = ok && !l->failed;
      worst = std::max({worst, l->err_q, l->err_u});
      runs.conservation = std::max(runs.conservation, l->max_conservation);
    }
  }
  // The coupled path with an exactly representable solution.
  const auto mesh = geometry::build_annulus_mesh(unit, inner, 0.1, 8.0);
  for (int k : {1, 2}) {
    const auto b = bundle_on(mesh, k);
    const auto c = harness::manufactured_case("constant", k, 2.5);
    coupling::CouplingConfig cfg;
    cfg.tolerance = 1e-13;  // iteration error must sit below the tolerance checked here
    cfg.max_iterations = 400;
    const auto st = coupling::run_fixed_point(b, data_of(c), cfg);
    runs.add_converged(b, st, c.f);
    const auto e = hdg::l2_errors(*b.system, st.field, [&](const Point& x) { return c.q(x); },
                                  [&](const Point& x) { return c.u(x); });
    worst = std::max({worst, e.q, e.u, std::abs(st.u_inf - 2.5)});
  }
  report(6, ok && worst <= 1e-9, fmt("polynomial patch, k=1,2, fitted and unfitted: max error %.2e", worst));
}

void ellipse_run() {
  coupling::BundleOptions o;
  o.n = 24;
  const auto e = geometry::Curve::ellipse(Point::Zero(), 1.2, 0.9);
  const auto mesh = geometry::build_annulus_mesh(e, inner, 0.1, 8.0);
  const auto b = coupling::make_bundle(e, inner, mesh, o);
  auto c = harness::manufactured_case("dipole-plus-constant");
  c.gamma = e;
  coupling::CouplingConfig cfg;
  cfg.omega = 0.4;
  cfg.max_iterations = 300;
  try {
    runs.add_converged(b, coupling::run_fixed_point(b, data_of(c), cfg), c.f);
  } catch (const coupling::DivergenceError& err) {
    runs.add_state(err.state());
  }
}

void u_infinity() {
  harness::StudyOptions o;
  const auto r = harness::convergence_study(harness::manufactured_case("dipole-plus-constant", 1, 3.0),
                                            {0.2, 0.1, 0.05, 0.025}, o);
  runs.add_study(r);
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < r.levels.size(); ++i) {
    ok = ok && !r.levels[i].failed;
    if (i > 0) ok = ok && r.levels[i].err_uinf < r.levels[i - 1].err_uinf;
    detail += fmt(" %.2e", r.levels[i].err_uinf);
  }
  ok = ok && r.levels.back().err_uinf <= 1e-4;
  report(9, ok, "|u_inf - 3| per level:" + detail);
}

void projection() {
  const std::array<double, 3> tau{1.0, 2.0, 0.5};
  double reproduce = 0.0;
  std::string detail;
  bool ok = true;
  for (int k : {1, 2}) {
    std::mt19937 rng(7 + k);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<double> a(30);
    for (auto& v : a) v = coef(rng);
    auto poly = [k](const double* p, const Point& x) {
      double s = 0.0;
      int i = 0;
      for (int d = 0; d <= k; ++d)
        for (int j = 0; j <= d; ++j) s += p[i++] * std::pow(x.x(), d - j) * std::pow(x.y(), j);
      return s;
    };
    const hdg::VectorFunction q = [&](const Point& x) { return Point(poly(&a[0], x), poly(&a[10], x)); };
    const hdg::SourceFunction u = [&](const Point& x) { return poly(&a[20], x); };
    const std::array<Point, 3> tri{Point(0.1, 0.2), Point(0.8, 0.3), Point(0.35, 0.9)};
    const auto p = hdg::hdg_projection(q, u, tri, tau, k);
    const int n = p.basis.size();
    for (const Point& x : {Point(0.4, 0.45), Point(0.3, 0.3), Point(0.6, 0.4)}) {
      const VectorX phi = p.basis.values(x);
      reproduce = std::max({reproduce, std::abs(phi.dot(p.u) - u(x)), std::abs(phi.dot(p.q.head(n)) - q(x).x()),
                            std::abs(phi.dot(p.q.tail(n)) - q(x).y())});
    }
    const hdg::SourceFunction us = [](const Point& x) { return std::sin(2 * x.x()) * std::exp(x.y()); };
    const hdg::VectorFunction qs = [](const Point& x) { return Point(std::cos(3 * x.y()), std::exp(x.x() - x.y())); };
    std::vector<double> err;
    for (int level = 0; level < 4; ++level) {
      const double s = std::pow(0.5, level);
      const std::array<Point, 3> t{Point(0.2, 0.2), Point(0.2 + 0.6 * s, 0.2 + 0.1 * s),
                                   Point(0.2 + 0.25 * s, 0.2 + 0.7 * s)};
      const auto pr = hdg::hdg_projection(qs, us, t, tau, k);
      const auto rule = triangle_rule<double>(2 * k + 8);
      double sum = 0.0;
      for (std::size_t i = 0; i < rule.size(); ++i) {
        const Point x = pr.basis.map(rule.nodes[i]);
        const VectorX phi = pr.basis.values(x);
        const Point dq = Point(phi.dot(pr.q.head(n)), phi.dot(pr.q.tail(n))) - qs(x);
        const double du = phi.dot(pr.u) - us(x);
        sum += 2.0 * rule.weights[i] * (dq.squaredNorm() + du * du);
      }
      err.push_back(std::sqrt(sum));
    }
    const double last = std::log2(err[2] / err[3]);
    ok = ok && last >= k + 1 - 0.3;
    detail += fmt(" k=%d last rate %.2f", k, last);
  }
  report(10, ok && reproduce <= 1e-12, fmt("projection reproduction error %.1e;", reproduce) + detail);
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const std::vector<std::pair<int, std::function<void()>>> steps{
      {1, dipole_rates}, {2, bem_spectral}, {3, contraction_and_uniqueness}, {5, monolithic},
      {6, patch_test},   {9, u_infinity},   {8, ellipse_run},                {10, projection}};
  for (const auto& [id, step] : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      report(id, false, std::string("threw: ") + e.what());
    }
  }
  report(7, runs.converged_runs > 0 && runs.conservation <= 1e-10,
         fmt("max conservation residual %.2e over %d converged runs", runs.conservation, runs.converged_runs));
  report(8, runs.runs > 0 && runs.lambda_mean <= 1e-12,
         fmt("max |mean lambda|/||lambda|| %.2e over %d runs, including an ellipse", runs.lambda_mean, runs.runs));
  std::printf("%d failing criteria, %.1f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
