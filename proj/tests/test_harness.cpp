#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hdgbem/harness/config.hpp"
#include "hdgbem/harness/study.hpp"
#include "support.hpp"

using namespace hdgbem;
using namespace hdgbem::harness;

TEST_CASE("manufactured case values") {
  const auto d = manufactured_case("dipole");
  CHECK(d.u(Point(2.0, 0.0)) == doctest::Approx(0.5));
  CHECK(d.u_infinity == 0.0);
  CHECK(d.g_exact(0.3) == doctest::Approx(std::cos(0.3)));
  CHECK(d.lambda_exact(0.3) == doctest::Approx(-std::cos(0.3)));
  double mean = 0.0;
  for (int i = 0; i < 64; ++i) mean += d.lambda_exact(kTwoPi * i / 64) / 64;
  CHECK(std::abs(mean) < 1e-15);
  const auto c = manufactured_case("dipole-plus-constant", 1, 3.0);
  CHECK(c.u(Point(2.0, 0.0)) == doctest::Approx(3.5));
  CHECK(c.u_infinity == 3.0);
  const auto p = manufactured_case("polynomial-patch", 1);
  CHECK(p.f(Point(0.3, 0.7)) == 0.0);
  CHECK((p.q(Point(0.3, 0.7)) - Point(-1.0, 0.0)).norm() == 0.0);
  CHECK_FALSE(p.has_exterior);
  CHECK_THROWS_AS(manufactured_case("quadrupole"), ConfigError);
  CHECK_THROWS_AS(manufactured_case("polynomial-patch", 3), DomainError);
}

TEST_CASE("every manufactured case satisfies its PDE pair at random points") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> r(0.5, 1.0), th(0.0, kTwoPi);
  std::vector<ManufacturedCase> cases;
  for (const auto& id : case_ids()) cases.push_back(manufactured_case(id, 1));
  cases.push_back(manufactured_case("polynomial-patch", 2));
  for (const auto& c : cases) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double rad = r(rng), a = th(rng);
      worst = std::max(worst, pde_residual(c, Point(rad * std::cos(a), rad * std::sin(a))));
    }
    INFO(c.id);
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("the residual sampler detects a wrong source") {
  auto c = manufactured_case("variable-kappa-bump");
  c.f = [](const Point&) { return 0.0; };
  CHECK(pde_residual(c, Point(0.62, 0.1)) > 1e-3);
}

TEST_CASE("bump conductivity is the identity near both curves") {
  const auto c = manufactured_case("variable-kappa-bump");
  for (double r : {0.5, 0.54, 0.96, 1.0, 2.0})
    CHECK((c.material(Point(r, 0.0)) - Matrix2::Identity()).norm() == 0.0);
  CHECK(c.material(Point(0.75, 0.0))(0, 0) == doctest::Approx(1.5));
}

TEST_CASE("config parsing accepts sections and dotted keys") {
  std::stringstream in(
      "# comment\n"
      "[coupling]\n"
      "omega = 0.3   # trailing comment\n"
      "n = 24\n"
      "[discretization]\n"
      "k = 2\n"
      "coupling.tol = 1e-9\n"
      "output.dir = results\n"
      "coupling.omega_grid = 0.2, 0.4\n");
  const auto c = parse_config(in);
  CHECK(c.omega == 0.3);
  CHECK(c.n == 24);
  CHECK(c.k == 2);
  CHECK(c.tol == 1e-9);
  CHECK(c.dir == "results");
  CHECK(c.omega_grid == std::vector<double>{0.2, 0.4});
  CHECK(c.study_sizes() == std::vector<double>{0.2, 0.1, 0.05, 0.025});
}

TEST_CASE("config errors name the offending key") {
  auto error_of = [](const std::string& text) {
    std::stringstream in(text);
    try {
      parse_config(in);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(error_of("[coupling]\nomega = -0.5\n").find("coupling.omega") != std::string::npos);
  CHECK(error_of("coupling.omega = abc\n").find("coupling.omega") != std::string::npos);
  CHECK(error_of("coupling.omegaa = 0.5\n").find("coupling.omegaa") != std::string::npos);
  CHECK(error_of("discretization.levels = 2.5\n").find("discretization.levels") != std::string::npos);
  CHECK(error_of("problem.case = quadrupole\n").find("problem.case") != std::string::npos);
  CHECK(error_of("[material]\nkappa = bump\n").find("material.kappa") != std::string::npos);
  CHECK(error_of("just a line\n").find("line 1") != std::string::npos);
  CHECK(error_of("geometry.gamma_shape = square\n").find("geometry.gamma_shape") != std::string::npos);
  CHECK(error_of("coupling.omega = 1.0\ngeometry.gamma_shape = ellipse\n").empty());
}

TEST_CASE("polynomial patch study is exact and leaves rates undefined") {
  StudyOptions o;
  o.k = 2;
  const auto report = convergence_study(manufactured_case("polynomial-patch", 2), {0.2, 0.1, 0.05}, o);
  for (const auto& l : report.levels) {
    CHECK_FALSE(l.failed);
    CHECK(l.err_q < 1e-9);
    CHECK(l.err_u < 1e-9);
    CHECK(std::isnan(l.rate_q));
    CHECK(std::isnan(l.rate_u));
  }
}

TEST_CASE("dipole study: rates, monotone errors and CSV layout") {
  StudyOptions o;
  o.k = 1;
  o.threads = 1;
  const auto c = manufactured_case("dipole");
  const auto report = convergence_study(c, {0.2, 0.1, 0.05}, o);
  REQUIRE(report.levels.size() == 3);
  for (std::size_t i = 1; i < report.levels.size(); ++i) {
    CHECK(report.levels[i].h < report.levels[i - 1].h);
    CHECK(report.levels[i].err_u <= report.levels[i - 1].err_u);
    CHECK(report.levels[i].err_q <= report.levels[i - 1].err_q);
  }
  CHECK(report.levels[2].rate_u > 1.8);
  CHECK(report.levels[2].rate_q > 1.8);
  CHECK(std::isnan(report.levels[0].rate_u));
  std::stringstream csv;
  write_study_csv(csv, report);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "level,h,R_h,err_q,err_u,rate_q,rate_u,iters,ratio");
  std::string row;
  int rows = 0;
  while (std::getline(csv, row)) {
    ++rows;
    CHECK(std::count(row.begin(), row.end(), ',') == 8);
  }
  CHECK(rows == 3);
  // Sequential assembly makes the report byte-identical across runs.
  std::stringstream again;
  write_study_csv(again, convergence_study(c, {0.2, 0.1, 0.05}, o));
  std::stringstream first;
  write_study_csv(first, report);
  CHECK(first.str() == again.str());
}

TEST_CASE("a failing level is marked and the study continues") {
  StudyOptions o;
  o.coupling.max_iterations = 2;
  const auto report = convergence_study(manufactured_case("dipole"), {0.2, 0.1}, o);
  for (const auto& l : report.levels) {
    CHECK(l.failed);
    CHECK_FALSE(l.message.empty());
  }
  StudyOptions fine;
  const auto mixed = convergence_study(manufactured_case("dipole"), {0.6, 0.2}, fine);
  CHECK(mixed.levels[0].failed);
  CHECK_FALSE(mixed.levels[1].failed);
  CHECK_THROWS_AS(convergence_study(manufactured_case("dipole"), {0.1, 0.2}, fine), ConfigError);
}

TEST_CASE("omega sweep records divergence and finds a contracting omega") {
  StudyOptions o;
  const auto rows = omega_sweep(manufactured_case("dipole"), test::annulus(0.1), {0.3, 0.5, 1.0}, o);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].converged);
  CHECK(rows[1].converged);
  CHECK_FALSE(rows[2].converged);
  CHECK_FALSE(rows[2].message.empty());
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.ratio));
    CHECK(r.ratio > 0.0);
  }
  const auto best = best_omega(rows);
  REQUIRE(best.has_value());
  CHECK(best->omega == 0.5);
  CHECK(best->ratio < 1.0);
  std::stringstream csv;
  write_sweep_csv(csv, rows);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "omega,converged,iters,ratio,final_update,err_g");
}

TEST_CASE("iteration log") {
  coupling::CouplingState st;
  st.history = {1.0, 0.5};
  st.u_inf_history = {0.0, 0.25};
  st.interior_residual = {1e-15, 2e-15};
  std::stringstream out;
  write_iteration_log(out, st);
  std::string line;
  std::getline(out, line);
  CHECK(line == "iter,update_norm,u_inf,interior_residual");
  std::getline(out, line);
  CHECK(line.rfind("1,1.000000000e+00,", 0) == 0);
}
