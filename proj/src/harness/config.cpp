#include "hdgbem/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace hdgbem::harness {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  int x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"geometry.gamma_shape", [](RunConfig& c, auto&, auto& v) { c.gamma_shape = v; }},
      {"geometry.gamma_shape", [](RunConfig& c, auto&, auto& v) { c.gamma_shape = v; }},
      {"geometry.gamma_radius", [](RunConfig& c, auto& k, auto& v) { c.gamma_radius = to_double(k, v); }},
      {"geometry.gamma_semi_x", [](RunConfig& c, auto& k, auto& v) { c.gamma_semi_x = to_double(k, v); }},
      {"geometry.gamma_semi_y", [](RunConfig& c, auto& k, auto& v) { c.gamma_semi_y = to_double(k, v); }},
      {"geometry.gamma0_radius", [](RunConfig& c, auto& k, auto& v) { c.gamma0_radius = to_double(k, v); }},
      {"geometry.regularity_bound", [](RunConfig& c, auto& k, auto& v) { c.regularity_bound = to_double(k, v); }},
      {"material.kappa", [](RunConfig& c, auto&, auto& v) { c.kappa = v; }},
      {"problem.case", [](RunConfig& c, auto&, auto& v) { c.case_id = v; }},
      {"problem.constant", [](RunConfig& c, auto& k, auto& v) { c.constant = to_double(k, v); }},
      {"problem.degree", [](RunConfig& c, auto& k, auto& v) { c.degree = to_int(k, v); }},
      {"discretization.k", [](RunConfig& c, auto& k, auto& v) { c.k = to_int(k, v); }},
      {"discretization.h0", [](RunConfig& c, auto& k, auto& v) { c.h0 = to_double(k, v); }},
      {"discretization.h", [](RunConfig& c, auto& k, auto& v) { c.h = to_double(k, v); }},
      {"discretization.levels", [](RunConfig& c, auto& k, auto& v) { c.levels = to_int(k, v); }},
      {"discretization.tau", [](RunConfig& c, auto& k, auto& v) { c.tau = to_double(k, v); }},
      {"discretization.threads", [](RunConfig& c, auto& k, auto& v) { c.threads = to_int(k, v); }},
      {"coupling.omega", [](RunConfig& c, auto& k, auto& v) { c.omega = to_double(k, v); }},
      {"coupling.tol", [](RunConfig& c, auto& k, auto& v) { c.tol = to_double(k, v); }},
      {"coupling.max_iter", [](RunConfig& c, auto& k, auto& v) { c.max_iter = to_int(k, v); }},
      {"coupling.n", [](RunConfig& c, auto& k, auto& v) { c.n = to_int(k, v); }},
      {"coupling.aitken", [](RunConfig& c, auto& k, auto& v) { c.aitken = to_bool(k, v); }},
      {"coupling.monolithic", [](RunConfig& c, auto& k, auto& v) { c.monolithic = to_bool(k, v); }},
      {"coupling.omega_grid", [](RunConfig& c, auto& k, auto& v) { c.omega_grid = to_list(k, v); }},
      {"output.dir", [](RunConfig& c, auto&, auto& v) { c.dir = v; }},
      {"output.vtk", [](RunConfig& c, auto& k, auto& v) { c.vtk = to_bool(k, v); }},
  };
  return table;
}

}  // namespace

std::vector<double> RunConfig::study_sizes() const {
  std::vector<double> hs;
  for (int i = 0; i < levels; ++i) hs.push_back(h0 / double(1 << i));
  return hs;
}

ManufacturedCase RunConfig::make_case() const {
  auto c = manufactured_case(case_id, degree > 0 ? degree : k, constant);
  if (gamma_shape == "circle")
    c.gamma = geometry::Curve::circle(Point::Zero(), gamma_radius);
  else
    c.gamma = geometry::Curve::ellipse(Point::Zero(), gamma_semi_x, gamma_semi_y);
  c.gamma0 = geometry::Curve::circle(Point::Zero(), gamma0_radius);
  return c;
}

StudyOptions RunConfig::study_options() const {
  StudyOptions o;
  o.k = k;
  o.n = n;
  o.tau = tau;
  o.regularity_bound = regularity_bound;
  o.threads = threads;
  o.coupling.omega = omega;
  o.coupling.tolerance = tol;
  o.coupling.max_iterations = max_iter;
  o.coupling.aitken = aitken;
  return o;
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(c.gamma_shape == "circle" || c.gamma_shape == "ellipse", "geometry.gamma_shape must be circle or ellipse");
  require(c.gamma_radius > 0.0, "geometry.gamma_radius must be positive");
  require(c.gamma_semi_x > 0.0 && c.gamma_semi_y > 0.0, "geometry.gamma_semi_x and gamma_semi_y must be positive");
  require(c.gamma0_radius > 0.0, "geometry.gamma0_radius must be positive");
  const double inner_extent = c.gamma_shape == "circle" ? c.gamma_radius : std::min(c.gamma_semi_x, c.gamma_semi_y);
  require(c.gamma0_radius < inner_extent, "geometry.gamma0_radius must be smaller than the outer curve");
  require(c.regularity_bound > 1.0, "geometry.regularity_bound must exceed 1");
  require(c.kappa == "auto" || c.kappa == "identity" || c.kappa == "bump",
          "material.kappa must be auto, identity or bump");
  const bool bump_case = c.case_id == "variable-kappa-bump";
  if (c.kappa == "bump") require(bump_case, "material.kappa: bump conductivity requires problem.case = variable-kappa-bump");
  if (c.kappa == "identity") require(!bump_case, "material.kappa: variable-kappa-bump uses the bump conductivity");
  bool known = false;
  for (const auto& id : case_ids()) known = known || id == c.case_id;
  require(known, "problem.case: unknown case '" + c.case_id + "'");
  require(c.degree >= 0 && c.degree <= 2, "problem.degree must be 0, 1 or 2");
  require(c.k >= 1 && c.k <= 6, "discretization.k must lie in [1, 6]");
  require(c.h0 > 0.0 && c.h0 < 1.0, "discretization.h0 must lie in (0, 1)");
  require(c.h >= 0.0, "discretization.h must be non-negative");
  require(c.levels >= 1 && c.levels <= 8, "discretization.levels must lie in [1, 8]");
  require(c.tau > 0.0, "discretization.tau must be positive");
  require(c.threads >= 0, "discretization.threads must be non-negative");
  require(c.omega > 0.0 && c.omega <= 1.0, "coupling.omega must lie in (0, 1]");
  require(c.tol > 0.0, "coupling.tol must be positive");
  require(c.max_iter >= 1, "coupling.max_iter must be at least 1");
  require(c.n >= 2, "coupling.n must be at least 2");
  for (double w : c.omega_grid) require(w > 0.0 && w <= 1.0, "coupling.omega_grid entries must lie in (0, 1]");
  require(!c.dir.empty(), "output.dir must not be empty");
}

RunConfig parse_config(std::istream& in) {
  RunConfig config;
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(number) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos && !section.empty()) key = section + "." + key;
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key + ": unknown key");
    if (value.empty()) throw ConfigError(key + ": missing value");
    it->second(config, key, value);
  }
  validate(config);
  return config;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace hdgbem::harness
