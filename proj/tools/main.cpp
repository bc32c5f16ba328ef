// Command-line driver: hdgbem {mesh|solve|study|sweep} CONFIG [--set key=value ...]
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hdgbem/coupling/coupling.hpp"
#include "hdgbem/harness/config.hpp"
#include "hdgbem/harness/study.hpp"
#include "hdgbem/hdg/diagnostics.hpp"

namespace fs = std::filesystem;
using namespace hdgbem;

namespace {

enum Exit { kOk = 0, kSolverFailure = 1, kConfigFailure = 2 };

harness::RunConfig load(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream text;
  text << file.rdbuf() << "\n";
  for (const auto& o : overrides) text << o << "\n";
  return harness::parse_config(text);
}

std::ofstream open_output(const harness::RunConfig& config, const std::string& name) {
  fs::create_directories(config.dir);
  std::ofstream out(fs::path(config.dir) / name);
  if (!out) throw FormatError("cannot write " + (fs::path(config.dir) / name).string());
  return out;
}

int run_mesh(const harness::RunConfig& config) {
  const auto c = config.make_case();
  const auto mesh = geometry::build_annulus_mesh(c.gamma, c.gamma0, config.mesh_size(), config.regularity_bound);
  const auto bmap = geometry::build_boundary_map(mesh, c.gamma, c.gamma0);
  const auto prox = geometry::proximity_parameter(mesh, bmap);
  auto out = open_output(config, "mesh.txt");
  geometry::write_mesh(out, mesh);
  double worst_shape = 0.0;
  for (int t = 0; t < mesh.num_elements(); ++t) worst_shape = std::max(worst_shape, mesh.shape_ratio(t));
  std::printf("%-22s %d\n%-22s %d\n%-22s %zu\n", "vertices", int(mesh.vertices.size()), "elements",
              mesh.num_elements(), "boundary edges", mesh.boundary_edges.size());
  std::printf("%-22s %d / %d\n", "outer / inner edges", mesh.count_tag(geometry::BoundaryTag::gamma),
              mesh.count_tag(geometry::BoundaryTag::gamma0));
  std::printf("%-22s %.4e\n%-22s %.4e\n%-22s %.4e\n%-22s %.3f\n", "h", mesh.h, "R_h", prox.R_h, "|n_h - n|_inf",
              prox.normal_deviation, "worst shape ratio", worst_shape);
  std::printf("%-22s %s\n", "written", (fs::path(config.dir) / "mesh.txt").c_str());
  return kOk;
}

void write_fields(const harness::RunConfig& config, const hdg::HDGSystem& sys, const hdg::DGField& field) {
  auto coeffs = open_output(config, "coefficients.csv");
  hdg::write_coefficients_csv(coeffs, field);
  if (config.vtk) {
    auto vtk = open_output(config, "field.vtk");
    hdg::write_vtk(vtk, sys, field, 2);
  }
}

int run_solve(const harness::RunConfig& config) {
  const auto c = config.make_case();
  const auto options = config.study_options();
  const auto mesh = geometry::build_annulus_mesh(c.gamma, c.gamma0, config.mesh_size(), config.regularity_bound);
  std::printf("%-22s %s\n%-22s %d\n%-22s %d\n", "case", c.id.c_str(), "elements", mesh.num_elements(), "k", config.k);
  if (!c.has_exterior) {
    const auto row = harness::solve_level(c, mesh, options);
    if (row.failed) throw SolverError(row.message);
    std::printf("%-22s %.4e\n%-22s %.4e\n%-22s %.4e\n%-22s %.3e\n", "R_h", row.R_h, "err_q", row.err_q, "err_u",
                row.err_u, "conservation", row.max_conservation);
    return kOk;
  }
  const auto bundle = coupling::make_bundle(c.gamma, c.gamma0, mesh, harness::bundle_options(c, options));
  const auto data = harness::interior_data(c);
  coupling::CouplingState st;
  try {
    st = coupling::run_fixed_point(bundle, data, options.coupling);
  } catch (const coupling::DivergenceError& e) {
    auto log = open_output(config, "iterations.csv");
    harness::write_iteration_log(log, e.state());
    throw;
  }
  {
    auto log = open_output(config, "iterations.csv");
    harness::write_iteration_log(log, st);
    auto g = open_output(config, "trace.csv");
    bem::write_density_csv(g, st.trace());
    auto lambda = open_output(config, "lambda.csv");
    bem::write_density_csv(lambda, st.lambda);
  }
  write_fields(config, *bundle.system, st.field);
  const auto err = hdg::l2_errors(*bundle.system, st.field, [&](const Point& x) { return c.q(x); },
                                  [&](const Point& x) { return c.u(x); });
  const double ratio = st.history.size() >= 3 ? coupling::estimate_contraction(st.history) : 0.0;
  std::printf("%-22s %d\n%-22s %.4f\n%-22s %.10f\n%-22s %.4e\n%-22s %.4e\n%-22s %.4e\n%-22s %.4e\n", "iterations",
              st.iterations, "contraction", ratio, "u_inf", st.u_inf, "|u_inf - exact|",
              std::abs(st.u_inf - c.u_infinity), "err_q", err.q, "err_u", err.u, "err_g",
              harness::interface_error(c, st.trace()));
  if (config.monolithic) {
    const auto mono = coupling::monolithic_solve(bundle, data);
    const double dq = (mono.field.q - st.field.q).norm() / std::max(st.field.q.norm(), 1e-300);
    const double du = (mono.field.u - st.field.u).norm() / std::max(st.field.u.norm(), 1e-300);
    std::printf("%-22s q %.3e  u %.3e  u_inf %.3e\n", "monolithic difference", dq, du, std::abs(mono.u_inf - st.u_inf));
  }
  return kOk;
}

int run_study(const harness::RunConfig& config) {
  const auto c = config.make_case();
  const auto report = harness::convergence_study(c, config.study_sizes(), config.study_options());
  auto out = open_output(config, "study.csv");
  harness::write_study_csv(out, report);
  std::printf("%5s %9s %9s %7s %11s %11s %7s %7s %5s %7s\n", "level", "h", "R_h", "elems", "err_q", "err_u", "rate_q",
              "rate_u", "iters", "ratio");
  bool failed = false;
  for (const auto& r : report.levels) {
    if (r.failed) {
      failed = true;
      std::printf("%5d %9.4f  failed: %s\n", r.level, r.h, r.message.c_str());
      continue;
    }
    std::printf("%5d %9.4f %9.4f %7d %11.4e %11.4e %7.3f %7.3f %5d %7.4f\n", r.level, r.h, r.R_h, r.elements, r.err_q,
                r.err_u, r.rate_q, r.rate_u, r.iterations, r.ratio);
  }
  return failed ? kSolverFailure : kOk;
}

int run_sweep(const harness::RunConfig& config) {
  const auto c = config.make_case();
  const auto mesh = geometry::build_annulus_mesh(c.gamma, c.gamma0, config.mesh_size(), config.regularity_bound);
  const auto rows = harness::omega_sweep(c, mesh, config.omega_grid, config.study_options());
  auto out = open_output(config, "sweep.csv");
  harness::write_sweep_csv(out, rows);
  std::printf("%7s %10s %6s %9s %12s\n", "omega", "converged", "iters", "ratio", "err_g");
  for (const auto& r : rows)
    std::printf("%7.3f %10s %6d %9.4f %12.4e\n", r.omega, r.converged ? "yes" : "no", r.iterations, r.ratio, r.err_g);
  if (const auto best = harness::best_omega(rows))
    std::printf("best omega %.3f (%d iterations)\n", best->omega, best->iterations);
  else
    std::printf("no omega converged\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled HDG/BEM solver for exterior diffusion problems"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string chosen;
  for (const char* name : {"mesh", "solve", "study", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("config", config_path, "key = value configuration file")->required();
    sub->add_option("--set", overrides, "override a key, e.g. --set coupling.omega=0.3");
    sub->callback([&chosen, name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailure;
  }
  try {
    const auto config = load(config_path, overrides);
    if (chosen == "mesh") return run_mesh(config);
    if (chosen == "solve") return run_solve(config);
    if (chosen == "study") return run_study(config);
    return run_sweep(config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
}
