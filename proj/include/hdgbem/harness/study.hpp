#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hdgbem/coupling/coupling.hpp"
#include "hdgbem/harness/manufactured.hpp"

namespace hdgbem::harness {

struct StudyOptions {
  int k = 1;
  int n = 32;
  double tau = 1.0;
  double regularity_bound = 8.0;
  coupling::CouplingConfig coupling;
  int threads = 0;  // assembly threads; 1 is sequential and bitwise reproducible
};

struct StudyLevel {
  int level = 0;
  double h = 0.0;  // requested mesh size
  double mesh_h = 0.0;
  double R_h = 0.0;
  int n = 0;
  int elements = 0;
  int trace_dofs = 0;
  double err_q = 0.0;
  double err_u = 0.0;
  double err_g = 0.0;     // || g_n + c - u |_Gamma ||
  double err_uinf = 0.0;  // |u_inf^n - u_inf|
  double rate_q = std::numeric_limits<double>::quiet_NaN();
  double rate_u = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double ratio = std::numeric_limits<double>::quiet_NaN();
  double max_conservation = 0.0;
  double max_lambda_mean = 0.0;  // max over iterations of |mean(lambda)| / ||lambda||
  bool failed = false;
  std::string message;
};

struct StudyReport {
  std::string case_id;
  int k = 1;
  std::vector<StudyLevel> levels;
};

/// Errors below this are treated as exact and get no rate.
inline constexpr double kExactThreshold = 1e-11;

/// Solves `c` on each mesh size (ordered by decreasing h). Cases with an
/// exterior run the coupled iteration; the others solve the interior problem
/// with exact Dirichlet data on both curves. A level that fails is marked
/// and the study moves on.
StudyReport convergence_study(const ManufacturedCase& c, const std::vector<double>& hs, const StudyOptions& options);
StudyLevel solve_level(const ManufacturedCase& c, const geometry::UnfittedMesh& mesh, const StudyOptions& options,
                       coupling::CouplingState* state = nullptr);
void compute_rates(StudyReport& report);
/// Columns level,h,R_h,err_q,err_u,rate_q,rate_u,iters,ratio.
void write_study_csv(std::ostream& out, const StudyReport& report);

struct SweepRow {
  double omega = 0.0;
  bool converged = false;
  int iterations = 0;
  double ratio = std::numeric_limits<double>::quiet_NaN();
  double final_update = 0.0;
  double err_g = std::numeric_limits<double>::quiet_NaN();
  std::string message;
};

/// Runs the coupled iteration for every omega on one mesh. Divergence is
/// recorded in the row, not thrown.
std::vector<SweepRow> omega_sweep(const ManufacturedCase& c, const geometry::UnfittedMesh& mesh,
                                  const std::vector<double>& omegas, const StudyOptions& options);
/// Converged omega with the fewest iterations, if any.
std::optional<SweepRow> best_omega(const std::vector<SweepRow>& rows);
/// Columns omega,converged,iters,ratio,final_update,err_g.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Columns iter,update_norm,u_inf,interior_residual.
void write_iteration_log(std::ostream& out, const coupling::CouplingState& state);

coupling::BundleOptions bundle_options(const ManufacturedCase& c, const StudyOptions& options);
coupling::InteriorData interior_data(const ManufacturedCase& c);
double interface_error(const ManufacturedCase& c, const bem::TrigPolynomial& trace);

}  // namespace hdgbem::harness
