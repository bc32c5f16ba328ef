#include "hdgbem/harness/study.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "hdgbem/hdg/diagnostics.hpp"

namespace hdgbem::harness {

coupling::BundleOptions bundle_options(const ManufacturedCase& c, const StudyOptions& options) {
  coupling::BundleOptions b;
  b.k = options.k;
  b.n = options.n;
  b.tau = options.tau;
  b.material = c.material;
  b.system.threads = options.threads;
  return b;
}

coupling::InteriorData interior_data(const ManufacturedCase& c) { return {c.f, c.boundary_datum()}; }

double interface_error(const ManufacturedCase& c, const bem::TrigPolynomial& trace) {
  const int m = std::max(8 * trace.degree(), 256);
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    const double s = kTwoPi * i / m;
    const double d = trace(s) - c.g_exact(s);
    sum += d * d * c.gamma.speed(s);
  }
  return std::sqrt(sum * kTwoPi / m);
}

namespace {

double worst_mean_ratio(const coupling::CouplingState& st) {
  double worst = 0.0;
  for (std::size_t i = 0; i < st.lambda_mean.size(); ++i) {
    if (st.lambda_mean[i] == 0.0) continue;
    const double norm = st.lambda_norm[i];
    worst = std::max(worst, norm > 0.0 ? st.lambda_mean[i] / norm : std::numeric_limits<double>::infinity());
  }
  return worst;
}

void record_iteration(StudyLevel& row, const coupling::CouplingState& st) {
  row.iterations = st.iterations;
  if (st.history.size() >= 3) row.ratio = coupling::estimate_contraction(st.history);
  row.max_lambda_mean = worst_mean_ratio(st);
}

}  // namespace

StudyLevel solve_level(const ManufacturedCase& c, const geometry::UnfittedMesh& mesh, const StudyOptions& options,
                       coupling::CouplingState* state) {
  StudyLevel row;
  row.mesh_h = mesh.h;
  row.n = options.n;
  row.elements = mesh.num_elements();
  const auto q_exact = [&c](const Point& x) { return c.q(x); };
  const auto u_exact = [&c](const Point& x) { return c.u(x); };
  try {
    if (c.has_exterior) {
      const auto bundle = coupling::make_bundle(c.gamma, c.gamma0, mesh, bundle_options(c, options));
      const auto& sys = *bundle.system;
      row.R_h = geometry::proximity_parameter(sys.mesh, sys.bmap).R_h;
      row.trace_dofs = sys.trace_size();
      coupling::CouplingState st;
      try {
        st = coupling::run_fixed_point(bundle, interior_data(c), options.coupling);
      } catch (const coupling::DivergenceError& e) {
        record_iteration(row, e.state());
        throw;
      }
      record_iteration(row, st);
      const auto err = hdg::l2_errors(sys, st.field, q_exact, u_exact);
      row.err_q = err.q;
      row.err_u = err.u;
      row.err_g = interface_error(c, st.trace());
      row.err_uinf = std::abs(st.u_inf - c.u_infinity);
      row.max_conservation = hdg::conservation_residuals(sys, st.field, c.f).maxCoeff();
      if (state) *state = std::move(st);
    } else {
      auto map_options = geometry::BoundaryMapOptions{};
      map_options.nodes_per_edge = std::max(map_options.nodes_per_edge, options.k + 2);
      const auto bmap = geometry::build_boundary_map(mesh, c.gamma, c.gamma0, map_options);
      const auto patches = geometry::build_extension_patches(mesh, bmap, c.gamma, c.gamma0);
      hdg::SystemOptions sys_options;
      sys_options.threads = options.threads;
      const auto sys = hdg::build_system(mesh, bmap, patches, c.material, hdg::Stabilization::uniform(mesh, options.tau),
                                         options.k, sys_options);
      row.R_h = geometry::proximity_parameter(mesh, bmap).R_h;
      row.trace_dofs = sys->trace_size();
      const auto datum = c.boundary_datum();
      const auto field = hdg::solve_interior(*sys, c.f, datum, datum);
      const auto err = hdg::l2_errors(*sys, field, q_exact, u_exact);
      row.err_q = err.q;
      row.err_u = err.u;
      row.max_conservation = hdg::conservation_residuals(*sys, field, c.f).maxCoeff();
    }
  } catch (const Error& e) {
    row.failed = true;
    row.message = e.what();
  }
  return row;
}

void compute_rates(StudyReport& report) {
  auto rate = [](double e0, double e1, double h0, double h1) {
    if (!(e0 > kExactThreshold && e1 > kExactThreshold)) return std::numeric_limits<double>::quiet_NaN();
    return std::log(e0 / e1) / std::log(h0 / h1);
  };
  auto& lv = report.levels;
  for (std::size_t i = 1; i < lv.size(); ++i) {
    if (lv[i].failed || lv[i - 1].failed) continue;
    lv[i].rate_q = rate(lv[i - 1].err_q, lv[i].err_q, lv[i - 1].h, lv[i].h);
    lv[i].rate_u = rate(lv[i - 1].err_u, lv[i].err_u, lv[i - 1].h, lv[i].h);
  }
}

StudyReport convergence_study(const ManufacturedCase& c, const std::vector<double>& hs, const StudyOptions& options) {
  StudyReport report;
  report.case_id = c.id;
  report.k = options.k;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (i > 0 && !(hs[i] < hs[i - 1])) throw ConfigError("discretization.h0: mesh sizes must decrease");
    StudyLevel row;
    try {
      const auto mesh = geometry::build_annulus_mesh(c.gamma, c.gamma0, hs[i], options.regularity_bound);
      row = solve_level(c, mesh, options);
    } catch (const Error& e) {
      row.failed = true;
      row.message = e.what();
    }
    row.level = int(i);
    row.h = hs[i];
    report.levels.push_back(std::move(row));
  }
  compute_rates(report);
  return report;
}

namespace {

struct Sci {
  double v;
};
std::ostream& operator<<(std::ostream& out, Sci s) {
  if (std::isnan(s.v)) return out << "nan";
  return out << std::scientific << std::setprecision(9) << s.v << std::defaultfloat;
}

}  // namespace

void write_study_csv(std::ostream& out, const StudyReport& report) {
  out << "level,h,R_h,err_q,err_u,rate_q,rate_u,iters,ratio\n";
  for (const auto& r : report.levels) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out << r.level << ',' << Sci{r.h} << ',' << Sci{r.failed ? nan : r.R_h} << ',' << Sci{r.failed ? nan : r.err_q}
        << ',' << Sci{r.failed ? nan : r.err_u} << ',' << Sci{r.rate_q} << ',' << Sci{r.rate_u} << ','
        << r.iterations << ',' << Sci{r.ratio} << '\n';
  }
}

std::vector<SweepRow> omega_sweep(const ManufacturedCase& c, const geometry::UnfittedMesh& mesh,
                                  const std::vector<double>& omegas, const StudyOptions& options) {
  if (!c.has_exterior) throw ConfigError("problem.case: the omega sweep needs a case with an exterior solution");
  const auto bundle = coupling::make_bundle(c.gamma, c.gamma0, mesh, bundle_options(c, options));
  const auto data = interior_data(c);
  std::vector<SweepRow> rows;
  for (double omega : omegas) {
    SweepRow row;
    row.omega = omega;
    auto config = options.coupling;
    config.omega = omega;
    config.aitken = false;
    const coupling::CouplingState* st = nullptr;
    coupling::CouplingState converged;
    std::optional<coupling::DivergenceError> failure;
    try {
      converged = coupling::run_fixed_point(bundle, data, config);
      st = &converged;
      row.converged = true;
      row.err_g = interface_error(c, converged.trace());
    } catch (const coupling::DivergenceError& e) {
      failure.emplace(e);
      st = &failure->state();
      row.message = e.what();
    } catch (const Error& e) {
      row.message = e.what();
    }
    if (st) {
      row.iterations = st->iterations;
      if (!st->history.empty()) row.final_update = st->history.back();
      if (st->history.size() >= 3) row.ratio = coupling::estimate_contraction(st->history);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<SweepRow> best_omega(const std::vector<SweepRow>& rows) {
  std::optional<SweepRow> best;
  for (const auto& r : rows)
    if (r.converged && (!best || r.iterations < best->iterations)) best = r;
  return best;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "omega,converged,iters,ratio,final_update,err_g\n";
  for (const auto& r : rows)
    out << Sci{r.omega} << ',' << (r.converged ? 1 : 0) << ',' << r.iterations << ',' << Sci{r.ratio} << ','
        << Sci{r.final_update} << ',' << Sci{r.err_g} << '\n';
}

void write_iteration_log(std::ostream& out, const coupling::CouplingState& state) {
  out << "iter,update_norm,u_inf,interior_residual\n";
  for (std::size_t i = 0; i < state.history.size(); ++i)
    out << i + 1 << ',' << Sci{state.history[i]} << ',' << Sci{state.u_inf_history[i]} << ','
        << Sci{state.interior_residual[i]} << '\n';
}

}  // namespace hdgbem::harness
