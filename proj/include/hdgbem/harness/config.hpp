#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hdgbem/harness/manufactured.hpp"
#include "hdgbem/harness/study.hpp"

namespace hdgbem::harness {

/// Settings read from a key = value file. Keys are dotted
/// (coupling.omega) or grouped under [section] headers; '#' starts a comment.
struct RunConfig {
  // geometry
  std::string gamma_shape = "circle";  // circle | ellipse
  double gamma_radius = 1.0;
  double gamma_semi_x = 1.2;
  double gamma_semi_y = 0.9;
  double gamma0_radius = 0.5;
  double regularity_bound = 8.0;
  // material
  std::string kappa = "auto";  // auto | identity | bump
  // problem
  std::string case_id = "dipole";
  double constant = 3.0;
  int degree = 0;  // polynomial-patch degree, 0 means discretization.k
  // discretization
  int k = 1;
  double h0 = 0.2;
  double h = 0.0;  // mesh size for mesh/solve/sweep, 0 means h0
  int levels = 4;
  double tau = 1.0;
  int threads = 0;
  // coupling
  double omega = 0.5;
  double tol = 1e-8;
  int max_iter = 200;
  int n = 32;
  bool aitken = false;
  bool monolithic = false;
  std::vector<double> omega_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  // output
  std::string dir = "out";
  bool vtk = false;

  double mesh_size() const { return h > 0.0 ? h : h0; }
  std::vector<double> study_sizes() const;  // h0, h0/2, ...
  ManufacturedCase make_case() const;
  StudyOptions study_options() const;
};

/// Throws ConfigError whose message starts with the offending key.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);
void validate(const RunConfig& config);

}  // namespace hdgbem::harness
