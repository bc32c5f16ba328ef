#include "hdgbem/coupling/coupling.hpp"

#include <cmath>
#include <sstream>

#include "hdgbem/hdg/diagnostics.hpp"

namespace hdgbem::coupling {

namespace {

TrigPolynomial with_constant(const TrigPolynomial& g, double c) {
  TrigPolynomial out = g;
  out.coefficients()[0] += c;
  out.set_mean_zero(false);
  return out;
}

std::vector<VectorX> interface_datum(const CouplingBundle& bundle, const std::vector<VectorX>& inner,
                                     const TrigPolynomial& dirichlet) {
  std::vector<VectorX> datum = inner;
  const auto& edges = bundle.system->bmap.edges;
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (edges[i].tag == geometry::BoundaryTag::gamma) datum[i] = bundle.node_basis[i] * dirichlet.coefficients();
  return datum;
}

}  // namespace

TrigPolynomial CouplingState::trace() const { return with_constant(g, constant); }
TrigPolynomial MonolithicSolution::trace() const { return with_constant(g, constant); }

CouplingBundle make_bundle(const geometry::Curve& gamma, const geometry::Curve& gamma0,
                           const geometry::UnfittedMesh& mesh, const BundleOptions& options) {
  CouplingBundle b;
  b.gamma = gamma;
  b.gamma0 = gamma0;
  auto map_options = options.map;
  map_options.nodes_per_edge = std::max(map_options.nodes_per_edge, options.k + 2);
  const auto bmap = geometry::build_boundary_map(mesh, gamma, gamma0, map_options);
  const auto patches = geometry::build_extension_patches(mesh, bmap, gamma, gamma0);
  b.system = hdg::build_system(mesh, bmap, patches, options.material, hdg::Stabilization::uniform(mesh, options.tau),
                               options.k, options.system);
  b.ops = bem::assemble_layer_operators(gamma, options.n, options.layer);
  b.flux_sampler = hdg::flux_extrapolation_operator(*b.system, gamma, TrigPolynomial::nodes(options.n));
  b.node_basis.resize(bmap.edges.size());
  for (std::size_t i = 0; i < bmap.edges.size(); ++i) {
    const auto& em = bmap.edges[i];
    if (em.tag != geometry::BoundaryTag::gamma) continue;
    b.node_basis[i].resize(em.s.size(), 2 * options.n);
    for (std::size_t j = 0; j < em.s.size(); ++j)
      b.node_basis[i].row(j) = TrigPolynomial::basis_values(options.n, em.s[j]).transpose();
  }
  InteriorLoads zero = interior_loads(b, InteriorData{});
  TrigPolynomial one(options.n);
  one.coefficients()[0] = 1.0;
  b.mean_flux_slope = dtn_step(b, zero, one).mean_flux;
  if (!(std::abs(b.mean_flux_slope) > 1e-14))
    throw SolverError("interface flux does not respond to a constant Dirichlet datum");
  return b;
}

void validate(const CouplingConfig& config) {
  if (!(config.omega > 0.0 && config.omega <= 1.0)) throw ConfigError("coupling.omega must lie in (0, 1]");
  if (!(config.tolerance > 0.0)) throw ConfigError("coupling.tol must be positive");
  if (config.max_iterations < 1) throw ConfigError("coupling.max_iter must be at least 1");
}

InteriorLoads interior_loads(const CouplingBundle& bundle, const InteriorData& data) {
  InteriorLoads loads;
  loads.source = hdg::source_responses(*bundle.system, data.f);
  loads.datum_inner = hdg::boundary_node_values(*bundle.system, nullptr, data.u0);
  return loads;
}

DtnResult dtn_step(const CouplingBundle& bundle, const InteriorLoads& loads, const TrigPolynomial& dirichlet) {
  const auto& sys = *bundle.system;
  if (dirichlet.degree() != bundle.n()) throw DimensionError("Dirichlet trace degree does not match the bundle");
  const VectorX rhs = hdg::assemble_rhs(sys, loads.source, interface_datum(bundle, loads.datum_inner, dirichlet));
  const VectorX trace = hdg::solve_trace(sys, rhs);
  DtnResult r;
  r.residual = (sys.matrix * trace - rhs).norm() / std::max(rhs.norm(), 1e-300);
  r.field = hdg::recover_field(sys, loads.source, trace);
  r.flux_samples = bundle.flux_sampler * r.field.q;
  const TrigPolynomial flux = TrigPolynomial::interpolate(r.flux_samples);
  r.mean_flux = bundle.ops.weight.mean(flux);
  r.lambda = bem::project_mean_zero(bundle.ops.weight, flux);
  r.lambda.coefficients() *= -1.0;
  return r;
}

DtnResult dtn_step(const CouplingBundle& bundle, const InteriorData& data, const TrigPolynomial& dirichlet) {
  return dtn_step(bundle, interior_loads(bundle, data), dirichlet);
}

NtdResult ntd_step(const bem::LayerOperatorSet& ops, const TrigPolynomial& lambda, double constant) {
  NtdResult r;
  r.g = bem::solve_exterior(ops, lambda);
  r.u_inf = bem::compute_u_infinity(ops, lambda, with_constant(r.g, constant));
  return r;
}

TrigPolynomial relax_update(const TrigPolynomial& previous, const TrigPolynomial& next, double omega) {
  return bem::relax(previous, next, omega);
}

double interface_l2_norm(const geometry::Curve& gamma, const TrigPolynomial& p) {
  const int m = std::max(8 * p.degree(), 64);
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    const double s = kTwoPi * i / m;
    const double v = p(s);
    sum += v * v * gamma.speed(s);
  }
  return std::sqrt(sum * kTwoPi / m);
}

CouplingState run_fixed_point(const CouplingBundle& bundle, const InteriorData& data, const CouplingConfig& config) {
  validate(config);
  const int n = bundle.n();
  const auto& ops = bundle.ops;
  const InteriorLoads loads = interior_loads(bundle, data);
  CouplingState st;
  st.g = config.initial_guess ? bem::project_mean_zero(ops.weight, *config.initial_guess) : TrigPolynomial(n);
  st.g.set_mean_zero(true);
  st.constant = config.initial_constant;
  double omega = config.omega;
  VectorX previous_residual;

  auto audit = [&](const TrigPolynomial& lambda) {
    st.lambda_mean.push_back(std::abs(ops.weight.mean(lambda)));
    st.lambda_norm.push_back(interface_l2_norm(bundle.gamma, lambda));
  };

  for (int it = 1; it <= config.max_iterations; ++it) {
    const TrigPolynomial G = st.trace();
    const DtnResult dtn = dtn_step(bundle, loads, G);
    st.interior_residual.push_back(dtn.residual);
    audit(dtn.lambda);
    const double c_tilde = st.constant - dtn.mean_flux / bundle.mean_flux_slope;
    const NtdResult ntd = ntd_step(ops, dtn.lambda, c_tilde);

    VectorX residual(2 * n + 1);
    residual << ntd.g.coefficients() - st.g.coefficients(), c_tilde - st.constant;
    if (config.aitken && previous_residual.size() == residual.size()) {
      const VectorX diff = residual - previous_residual;
      const double denom = diff.squaredNorm();
      if (denom > 0.0) omega = std::clamp(-omega * previous_residual.dot(diff) / denom, 0.01, 1.0);
    }
    previous_residual = residual;
    st.omega_history.push_back(omega);

    TrigPolynomial g_new = relax_update(st.g, ntd.g, omega);
    g_new.set_mean_zero(true);
    const double c_new = omega * c_tilde + (1.0 - omega) * st.constant;
    const TrigPolynomial G_new = with_constant(g_new, c_new);
    TrigPolynomial delta = G_new;
    delta.coefficients() -= G.coefficients();
    const double update = interface_l2_norm(bundle.gamma, delta);
    st.g = g_new;
    st.constant = c_new;
    st.lambda = dtn.lambda;
    st.field = dtn.field;
    st.u_inf = bem::compute_u_infinity(ops, dtn.lambda, G_new);
    st.history.push_back(update);
    st.u_inf_history.push_back(st.u_inf);
    st.iterations = it;
    if (!std::isfinite(update) || update > 1e10 * std::max(1.0, st.history.front())) {
      std::ostringstream msg;
      msg << "fixed-point iteration blew up at iteration " << it << " (omega = " << omega << ")";
      throw DivergenceError(msg.str(), st);
    }
    if (update <= config.tolerance * std::max(1.0, interface_l2_norm(bundle.gamma, G_new))) {
      st.converged = true;
      break;
    }
  }
  if (!st.converged) {
    std::ostringstream msg;
    msg << "fixed-point iteration did not converge in " << config.max_iterations << " iterations (omega = "
        << config.omega << ", last update " << st.history.back() << ")";
    throw DivergenceError(msg.str(), st);
  }
  // Interior fields and flux density consistent with the converged trace.
  const DtnResult fin = dtn_step(bundle, loads, st.trace());
  audit(fin.lambda);
  st.field = fin.field;
  st.lambda = fin.lambda;
  st.u_inf = bem::compute_u_infinity(ops, fin.lambda, st.trace());
  return st;
}

double estimate_contraction(const std::vector<double>& history) {
  const int n = int(history.size());
  if (n < 3) throw EstimationError("contraction estimate needs at least three update norms");
  const int len = std::max(2, n / 2);
  const double first = history[n - len], last = history[n - 1];
  if (last == 0.0) return 0.0;
  if (!(first > 0.0)) throw EstimationError("update history must be positive");
  return std::pow(last / first, 1.0 / (len - 1));
}

MonolithicSolution monolithic_solve(const CouplingBundle& bundle, const InteriorData& data) {
  const auto& sys = *bundle.system;
  const auto& ops = bundle.ops;
  const int n = bundle.n();
  const int n2 = 2 * n;
  const int T = sys.trace_size();
  const int np = sys.np();
  const int m = sys.k + 1;
  const int ne = sys.mesh.num_elements();
  const int total = T + (n2 - 1) + 1;
  const int col_y = T, col_c = T + n2 - 1;
  const int row_bem = T, row_mean = T + n2 - 1;

  const InteriorLoads loads = interior_loads(bundle, data);
  const VectorX rhs0 = hdg::assemble_rhs(sys, loads.source, loads.datum_inner);

  MatrixX trial = MatrixX::Zero(n2, n2 - 1);
  for (int k = 1; k < n2; ++k) {
    trial(k, k - 1) = 1.0;
    trial(0, k - 1) = -ops.weight.weights()[k] / ops.weight.length();
  }
  // Samples -> interpolant coefficients, and the mean-zero projection.
  MatrixX interp(n2, n2), proj(n2, n2);
  for (int j = 0; j < n2; ++j) {
    const VectorX e = VectorX::Unit(n2, j);
    interp.col(j) = TrigPolynomial::interpolate(e).coefficients();
    proj.col(j) = bem::project_mean_zero(ops.weight, e).coefficients();
  }
  const Eigen::RowVectorXd mean_row = ops.weight.weights().transpose() * interp / ops.weight.length();

  Eigen::SparseMatrix<double> qmap(2 * np * ne, T);
  {
    std::vector<Eigen::Triplet<double>> trip;
    for (int t = 0; t < ne; ++t)
      for (int f = 0; f < 3; ++f) {
        const int e = sys.mesh.element_edges[t][f];
        for (int i = 0; i < 2 * np; ++i)
          for (int a = 0; a < m; ++a) trip.emplace_back(2 * np * t + i, e * m + a, sys.kinv_c[t](i, f * m + a));
      }
    qmap.setFromTriplets(trip.begin(), trip.end());
  }
  VectorX q_src(2 * np * ne);
  for (int t = 0; t < ne; ++t) q_src.segment(2 * np * t, 2 * np) = loads.source[t].head(2 * np);
  const Eigen::SparseMatrix<double> sq = bundle.flux_sampler * qmap;  // flux samples = s_src - sq * trace
  const VectorX s_src = bundle.flux_sampler * q_src;

  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < sys.matrix.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.matrix, c); it; ++it)
      trip.emplace_back(it.row(), it.col(), it.value());
  // Interface datum enters the HDG rows through the edge loads.
  for (std::size_t bi = 0; bi < sys.bmap.edges.size(); ++bi) {
    const auto& em = sys.bmap.edges[bi];
    if (em.tag != geometry::BoundaryTag::gamma) continue;
    const MatrixX lg = sys.transfer[bi].load * bundle.node_basis[bi];  // m x n2
    const MatrixX ly = lg * trial;
    for (int a = 0; a < m; ++a) {
      for (int k = 0; k < n2 - 1; ++k) trip.emplace_back(em.edge * m + a, col_y + k, -ly(a, k));
      trip.emplace_back(em.edge * m + a, col_c, -lg(a, 0));
    }
  }
  const MatrixX galerkin_rows = ops.galerkin_V.bottomRows(n2 - 1) * proj;  // acts on flux samples
  const MatrixX H = (0.5 * ops.gram - ops.galerkin_K).bottomRows(n2 - 1) * trial;
  for (int l = 0; l < n2 - 1; ++l)
    for (int k = 0; k < n2 - 1; ++k) trip.emplace_back(row_bem + l, col_y + k, H(l, k));
  const MatrixX coupling_rows = galerkin_rows * MatrixX(sq);
  const Eigen::RowVectorXd mean_coupling = mean_row * MatrixX(sq);
  for (int c = 0; c < T; ++c) {
    for (int l = 0; l < n2 - 1; ++l)
      if (coupling_rows(l, c) != 0.0) trip.emplace_back(row_bem + l, c, coupling_rows(l, c));
    if (mean_coupling(c) != 0.0) trip.emplace_back(row_mean, c, -mean_coupling(c));
  }
  VectorX rhs(total);
  rhs << rhs0, galerkin_rows * s_src, -mean_row.dot(s_src);

  Eigen::SparseMatrix<double> A(total, total);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw OracleError("coupled system is singular: " + lu.lastErrorMessage());
  const VectorX x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw OracleError("coupled solve failed");

  MonolithicSolution sol;
  sol.field = hdg::recover_field(sys, loads.source, x.head(T));
  sol.g = TrigPolynomial(n, trial * x.segment(col_y, n2 - 1), true);
  sol.constant = x[col_c];
  const VectorX fs = bundle.flux_sampler * sol.field.q;
  sol.lambda = TrigPolynomial(n, -proj * fs, true);
  sol.u_inf = bem::compute_u_infinity(ops, sol.lambda, sol.trace());
  return sol;
}

}  // namespace hdgbem::coupling
