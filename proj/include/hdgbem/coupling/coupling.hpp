#pragma once

#include <optional>
#include <vector>

#include "hdgbem/bem/layer.hpp"
#include "hdgbem/errors.hpp"
#include "hdgbem/hdg/system.hpp"

namespace hdgbem::coupling {

using bem::TrigPolynomial;
using hdg::DGField;

struct InteriorData {
  hdg::SourceFunction f;
  hdg::BoundaryFunction u0;
};

/// Everything that depends on the mesh and the degrees but not on the data:
/// the factorized HDG system, the layer operators on the outer curve, the
/// sampler of E q_h . n at the 2n interface nodes and the response of the
/// mean interface flux to a unit constant Dirichlet datum.
struct CouplingBundle {
  geometry::Curve gamma = geometry::Curve::circle(Point::Zero(), 1.0);
  geometry::Curve gamma0 = geometry::Curve::circle(Point::Zero(), 0.5);
  std::shared_ptr<hdg::HDGSystem> system;
  bem::LayerOperatorSet ops;
  Eigen::SparseMatrix<double> flux_sampler;
  std::vector<MatrixX> node_basis;  // per boundary edge: trig basis at map nodes (outer edges only)
  double mean_flux_slope = 0.0;
  int n() const { return ops.n; }
};

struct BundleOptions {
  int k = 1;
  int n = 32;
  double tau = 1.0;
  hdg::Material material = hdg::Material::identity();
  geometry::BoundaryMapOptions map;
  hdg::SystemOptions system;
  bem::LayerOptions layer;
};

CouplingBundle make_bundle(const geometry::Curve& gamma, const geometry::Curve& gamma0,
                           const geometry::UnfittedMesh& mesh, const BundleOptions& options);

struct CouplingConfig {
  double omega = 0.5;
  int max_iterations = 200;
  double tolerance = 1e-8;
  bool aitken = false;
  std::optional<TrigPolynomial> initial_guess;  // mean-zero part of the trace
  double initial_constant = 0.0;
};

void validate(const CouplingConfig& config);

struct CouplingState {
  int iterations = 0;
  bool converged = false;
  TrigPolynomial g;  // arclength-mean-zero part of the Dirichlet trace
  double constant = 0.0;
  TrigPolynomial lambda;
  double u_inf = 0.0;
  std::vector<double> history;  // ||G^k - G^{k-1}||_{L2(Gamma)}
  std::vector<double> u_inf_history;
  std::vector<double> interior_residual;
  std::vector<double> lambda_mean;  // |weighted mean of lambda| per iteration
  std::vector<double> lambda_norm;
  std::vector<double> omega_history;
  DGField field;

  /// Full Dirichlet trace g + constant.
  TrigPolynomial trace() const;
};

class DivergenceError : public SolverError {
 public:
  DivergenceError(const std::string& what, CouplingState state) : SolverError(what), state_(std::move(state)) {}
  const CouplingState& state() const { return state_; }

 private:
  CouplingState state_;
};

/// Cached data-dependent pieces of the interior solve.
struct InteriorLoads {
  std::vector<VectorX> source;
  std::vector<VectorX> datum_inner;
};
InteriorLoads interior_loads(const CouplingBundle& bundle, const InteriorData& data);

struct DtnResult {
  TrigPolynomial lambda;  // -P(E q_h . n)
  VectorX flux_samples;   // E q_h . n at the interface nodes
  double mean_flux = 0.0; // weighted mean of the interpolated flux
  double residual = 0.0;  // relative residual of the condensed solve
  DGField field;
};

DtnResult dtn_step(const CouplingBundle& bundle, const InteriorLoads& loads, const TrigPolynomial& dirichlet);
DtnResult dtn_step(const CouplingBundle& bundle, const InteriorData& data, const TrigPolynomial& dirichlet);

struct NtdResult {
  TrigPolynomial g;
  double u_inf = 0.0;
};
/// Exterior solve for the mean-zero trace; u_inf uses the trace g + constant.
NtdResult ntd_step(const bem::LayerOperatorSet& ops, const TrigPolynomial& lambda, double constant = 0.0);

TrigPolynomial relax_update(const TrigPolynomial& previous, const TrigPolynomial& next, double omega);

double interface_l2_norm(const geometry::Curve& gamma, const TrigPolynomial& p);

CouplingState run_fixed_point(const CouplingBundle& bundle, const InteriorData& data, const CouplingConfig& config);

/// Geometric-mean ratio of successive entries over the tail half.
double estimate_contraction(const std::vector<double>& history);

struct MonolithicSolution {
  DGField field;
  TrigPolynomial g;
  double constant = 0.0;
  TrigPolynomial lambda;
  double u_inf = 0.0;
  TrigPolynomial trace() const;
};

/// One sparse system for traces, interface density and constant together.
MonolithicSolution monolithic_solve(const CouplingBundle& bundle, const InteriorData& data);

}  // namespace hdgbem::coupling
