#include "hdgbem/hdg/system.hpp"

#include <cmath>
#include <sstream>

#include "hdgbem/errors.hpp"
#include "hdgbem/parallel.hpp"
#include "hdgbem/quadrature.hpp"

namespace hdgbem::hdg {

Material Material::scalar(double c) {
  if (!(c > 0.0)) throw AssemblyError("conductivity must be positive");
  Material m;
  m.kappa = [c](const Point&) -> Matrix2 { return c * Matrix2::Identity(); };
  m.lower = m.upper = c;
  return m;
}

Material Material::field(std::function<Matrix2(const Point&)> kappa, double lower, double upper) {
  Material m;
  m.kappa = std::move(kappa);
  m.lower = lower;
  m.upper = upper;
  m.constant = false;
  return m;
}

Stabilization Stabilization::uniform(const UnfittedMesh& mesh, double value) {
  if (!(value > 0.0)) throw AssemblyError("stabilization must be positive");
  return Stabilization{VectorX::Constant(mesh.num_edges(), value)};
}

Point DGField::q_at(int t, const Point& x) const {
  const int n = np();
  const VectorX phi = (*basis)[t].values(x);
  return Point(phi.dot(q.segment(2 * n * t, n)), phi.dot(q.segment(2 * n * t + n, n)));
}

double DGField::u_at(int t, const Point& x) const {
  const int n = np();
  return (*basis)[t].values(x).dot(u.segment(n * t, n));
}

double DGField::uhat_at(int edge, double xi) const { return edge_basis(k, xi).dot(uhat.segment(edge * (k + 1), k + 1)); }

LocalBlocks assemble_local(const UnfittedMesh& mesh, int t, const ElementBasis& basis, const Material& material,
                           const Stabilization& tau, int k) {
  const int n = dim_p(k);
  const int m = k + 1;
  LocalBlocks b;
  b.mass_kinv = MatrixX::Zero(2 * n, 2 * n);
  b.div = MatrixX::Zero(n, 2 * n);
  b.stab = MatrixX::Zero(n, n);
  const auto rule = triangle_rule<double>(2 * k + (material.constant ? 0 : 12));
  const double jac = 2.0 * basis.area();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point x = basis.map(rule.nodes[q]);
    const double w = jac * rule.weights[q];
    const VectorX phi = basis.values(x);
    const auto grad = basis.gradients(x);
    const Matrix2 kinv = material.inverse(x);
    const MatrixX pp = w * phi * phi.transpose();
    for (int c = 0; c < 2; ++c)
      for (int d = 0; d < 2; ++d) b.mass_kinv.block(c * n, d * n, n, n) += kinv(c, d) * pp;
    for (int c = 0; c < 2; ++c) b.div.block(0, c * n, n, n) += w * phi * grad.col(c).transpose();
  }
  const auto face_rule = gauss_legendre<double>(k + 2);
  for (int f = 0; f < 3; ++f) {
    const int e = mesh.element_edges[t][f];
    const Point p0 = mesh.vertices[mesh.edges[e].vertices[0]];
    const Point p1 = mesh.vertices[mesh.edges[e].vertices[1]];
    const double len = (p1 - p0).norm();
    const Point nu = mesh.element_normal(t, f);
    b.face_u[f] = MatrixX::Zero(n, m);
    b.face_q[f] = MatrixX::Zero(2 * n, m);
    b.face_mass[f] = MatrixX::Zero(n, n);
    for (std::size_t q = 0; q < face_rule.size(); ++q) {
      const double xi = face_rule.nodes[q];
      const double w = face_rule.weights[q] * len;
      const VectorX phi = basis.values(p0 + xi * (p1 - p0));
      const VectorX psi = edge_basis(k, xi);
      const MatrixX pu = w * phi * psi.transpose();
      b.face_u[f] += pu;
      b.face_q[f].topRows(n) += nu.x() * pu;
      b.face_q[f].bottomRows(n) += nu.y() * pu;
      b.face_mass[f] += w * phi * phi.transpose();
    }
    b.stab += tau.tau[e] * b.face_mass[f];
  }
  b.K = MatrixX::Zero(3 * n, 3 * n);
  b.K.topLeftCorner(2 * n, 2 * n) = b.mass_kinv;
  b.K.topRightCorner(2 * n, n) = -b.div.transpose();
  b.K.bottomLeftCorner(n, 2 * n) = b.div;
  b.K.bottomRightCorner(n, n) = b.stab;
  b.C = MatrixX::Zero(3 * n, 3 * m);
  for (int f = 0; f < 3; ++f) {
    const double tf = tau.tau[mesh.element_edges[t][f]];
    b.C.block(0, f * m, 2 * n, m) = b.face_q[f];
    b.C.block(2 * n, f * m, n, m) = -tf * b.face_u[f];
  }
  return b;
}

TransferBlocks assemble_transfer(const EdgeTransfer& map, const ExtensionPatch& patch, const ElementBasis& parent,
                                 const Material& material, double tau, int k) {
  const int n = dim_p(k);
  const int nodes = int(map.x.size());
  TransferBlocks tb;
  tb.node_operator = MatrixX::Zero(nodes, 2 * n);
  tb.load = MatrixX::Zero(k + 1, nodes);
  const auto path = gauss_legendre<double>(k + 2 + (material.constant ? 0 : 4));
  const double width = patch.s_end - patch.s_begin;
  for (int j = 0; j < nodes; ++j) {
    const double offset = wrap_angle(map.s[j] - patch.s_begin);
    const double tol = 1e-10;
    const bool inside = width >= 0.0 ? (offset >= -tol && offset <= width + tol) : (offset <= tol && offset >= width - tol);
    if (!inside) {
      std::ostringstream msg;
      msg << "transfer node " << j << " of boundary edge " << map.edge << " maps outside its extension patch";
      throw TransferError(msg.str());
    }
    tb.load.col(j) = map.weights[j] * edge_basis(k, map.xi[j]);
    if (map.l[j] <= 0.0) continue;
    tb.zero = false;
    for (std::size_t p = 0; p < path.size(); ++p) {
      const Point y = map.x[j] + map.l[j] * path.nodes[p] * map.t[j];
      const Point kt = material.inverse(y).transpose() * map.t[j];
      const VectorX phi = parent.values(y);
      const double w = map.l[j] * path.weights[p];
      tb.node_operator.block(j, 0, 1, n) += (w * kt.x()) * phi.transpose();
      tb.node_operator.block(j, n, 1, n) += (w * kt.y()) * phi.transpose();
    }
  }
  tb.P = tb.load * tb.node_operator;
  tb.A_T = MatrixX::Zero(2 * n, 2 * n);
  tb.B_T = MatrixX::Zero(n, 2 * n);
  for (int j = 0; j < nodes; ++j) {
    const VectorX phi = parent.values(map.x[j]);
    VectorX vnu(2 * n);
    vnu << map.nu_h.x() * phi, map.nu_h.y() * phi;
    tb.A_T += map.weights[j] * vnu * tb.node_operator.row(j);
    tb.B_T += (tau * map.weights[j]) * phi * tb.node_operator.row(j);
  }
  return tb;
}

std::shared_ptr<HDGSystem> build_system(const UnfittedMesh& mesh, const BoundaryMap& bmap,
                                        const std::vector<ExtensionPatch>& patches, const Material& material,
                                        const Stabilization& tau, int k, const SystemOptions& options) {
  if (k < 0) throw AssemblyError("polynomial degree must be nonnegative");
  if (bmap.edges.size() != mesh.boundary_edges.size() || patches.size() != mesh.boundary_edges.size())
    throw AssemblyError("boundary map and patches do not match the mesh");
  if (bmap.nodes_per_edge < k + 1) throw AssemblyError("boundary map has too few nodes for degree k");
  if (tau.tau.size() != mesh.num_edges()) throw AssemblyError("stabilization size does not match the edges");
  auto sys = std::make_shared<HDGSystem>();
  sys->k = k;
  sys->mesh = mesh;
  sys->bmap = bmap;
  sys->patches = patches;
  sys->material = material;
  sys->tau = tau;
  sys->options = options;
  const int ne = mesh.num_elements();
  const int n = dim_p(k);
  const int m = k + 1;

  auto basis = std::make_shared<std::vector<ElementBasis>>(ne);
  parallel_for(ne, [&](int t) {
    const auto& el = mesh.elements[t];
    (*basis)[t] = ElementBasis({mesh.vertices[el[0]], mesh.vertices[el[1]], mesh.vertices[el[2]]}, k);
  }, options.threads);
  sys->basis = basis;

  sys->local_lu.resize(ne);
  sys->kinv_c.resize(ne);
  sys->flux_rows.resize(ne);
  parallel_for(ne, [&](int t) {
    const LocalBlocks b = assemble_local(mesh, t, (*basis)[t], material, tau, k);
    sys->local_lu[t].compute(b.K);
    if (!(sys->local_lu[t].rcond() > 1e-14)) {
      std::ostringstream msg;
      msg << "singular local solver on element " << t << " (tau = " << tau.tau[mesh.element_edges[t][0]] << ")";
      throw AssemblyError(msg.str());
    }
    sys->kinv_c[t] = sys->local_lu[t].solve(b.C);
    for (int f = 0; f < 3; ++f) {
      const double tf = tau.tau[mesh.element_edges[t][f]];
      MatrixX r(m, 3 * n);
      r << b.face_q[f].transpose(), tf * b.face_u[f].transpose();
      sys->flux_rows[t][f] = r;
    }
  }, options.threads);

  const int nb = int(mesh.boundary_edges.size());
  sys->transfer.resize(nb);
  parallel_for(nb, [&](int i) {
    const auto& em = bmap.edges[i];
    sys->transfer[i] = assemble_transfer(em, patches[i], (*basis)[em.element], material, tau.tau[em.edge], k);
  }, options.threads);

  // Element-wise blocks computed concurrently, reduced in element order.
  struct Block {
    int row_edge;
    MatrixX values;  // m x 3m over the element's three edges
  };
  std::vector<std::vector<Block>> blocks(ne);
  parallel_for(ne, [&](int t) {
    for (int f = 0; f < 3; ++f) {
      const int e = mesh.element_edges[t][f];
      const int bi = mesh.boundary_position[e];
      if (bi < 0) {
        blocks[t].push_back({e, sys->flux_rows[t][f] * sys->kinv_c[t]});
      } else if (options.include_transfer && !sys->transfer[bi].zero) {
        blocks[t].push_back({e, sys->transfer[bi].P * sys->kinv_c[t].topRows(2 * n)});
      }
    }
  }, options.threads);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(ne) * 3 * m * 3 * m + std::size_t(mesh.num_edges()) * m);
  for (int t = 0; t < ne; ++t) {
    for (const auto& b : blocks[t]) {
      for (int g = 0; g < 3; ++g) {
        const int col_edge = mesh.element_edges[t][g];
        for (int a = 0; a < m; ++a)
          for (int c = 0; c < m; ++c) trip.emplace_back(b.row_edge * m + a, col_edge * m + c, b.values(a, g * m + c));
      }
    }
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const double len = mesh.edge_length(e);
    const double diag = mesh.boundary_position[e] < 0 ? 2.0 * tau.tau[e] * len : len;
    for (int a = 0; a < m; ++a) trip.emplace_back(e * m + a, e * m + a, diag);
  }
  sys->matrix.resize(sys->trace_size(), sys->trace_size());
  sys->matrix.setFromTriplets(trip.begin(), trip.end());
  sys->matrix.makeCompressed();
  sys->solver = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  sys->solver->analyzePattern(sys->matrix);
  sys->solver->factorize(sys->matrix);
  if (sys->solver->info() != Eigen::Success)
    throw SolverError("factorization of the condensed system failed: " + sys->solver->lastErrorMessage());
  return sys;
}

std::vector<VectorX> source_responses(const HDGSystem& sys, const SourceFunction& f) {
  const int ne = sys.mesh.num_elements();
  const int n = sys.np();
  std::vector<VectorX> out(ne, VectorX::Zero(3 * n));
  if (!f) return out;
  const auto rule = triangle_rule<double>(2 * sys.k + 4);
  parallel_for(ne, [&](int t) {
    const auto& b = (*sys.basis)[t];
    VectorX F = VectorX::Zero(3 * n);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = b.map(rule.nodes[q]);
      F.tail(n) += (2.0 * b.area() * rule.weights[q] * f(x)) * b.values(x);
    }
    out[t] = sys.local_lu[t].solve(F);
  }, sys.options.threads);
  return out;
}

std::vector<VectorX> boundary_node_values(const HDGSystem& sys, const BoundaryFunction& g, const BoundaryFunction& u0) {
  std::vector<VectorX> out(sys.bmap.edges.size());
  for (std::size_t i = 0; i < sys.bmap.edges.size(); ++i) {
    const auto& em = sys.bmap.edges[i];
    const BoundaryFunction& fn = em.tag == geometry::BoundaryTag::gamma ? g : u0;
    out[i] = VectorX::Zero(em.x.size());
    if (!fn) continue;
    for (std::size_t j = 0; j < em.x.size(); ++j) out[i][j] = fn(em.xbar[j], em.s[j]);
  }
  return out;
}

VectorX assemble_rhs(const HDGSystem& sys, const std::vector<VectorX>& source, const std::vector<VectorX>& datum) {
  const auto& mesh = sys.mesh;
  const int m = sys.k + 1;
  const int n = sys.np();
  VectorX rhs = VectorX::Zero(sys.trace_size());
  for (int t = 0; t < mesh.num_elements(); ++t) {
    for (int f = 0; f < 3; ++f) {
      const int e = mesh.element_edges[t][f];
      const int bi = mesh.boundary_position[e];
      if (bi < 0) {
        rhs.segment(e * m, m) += sys.flux_rows[t][f] * source[t];
      } else {
        rhs.segment(e * m, m) += sys.transfer[bi].load * datum[bi];
        if (sys.options.include_transfer && !sys.transfer[bi].zero)
          rhs.segment(e * m, m) += sys.transfer[bi].P * source[t].head(2 * n);
      }
    }
  }
  return rhs;
}

VectorX solve_trace(const HDGSystem& sys, const VectorX& rhs) {
  VectorX x = sys.solver->solve(rhs);
  if (sys.solver->info() != Eigen::Success) throw SolverError("condensed solve failed");
  const double res = (sys.matrix * x - rhs).norm();
  const double scale = std::max(rhs.norm(), 1e-300);
  if (!std::isfinite(res) || res > 1e-8 * scale + 1e-300) {
    std::ostringstream msg;
    msg << "condensed solve residual " << res / scale << " exceeds tolerance (ill-conditioned system)";
    throw SolverError(msg.str());
  }
  return x;
}

DGField recover_field(const HDGSystem& sys, const std::vector<VectorX>& source, const VectorX& trace) {
  const auto& mesh = sys.mesh;
  const int n = sys.np();
  const int m = sys.k + 1;
  DGField field;
  field.k = sys.k;
  field.basis = sys.basis;
  field.q.resize(2 * n * mesh.num_elements());
  field.u.resize(n * mesh.num_elements());
  field.uhat = trace;
  parallel_for(mesh.num_elements(), [&](int t) {
    VectorX lam(3 * m);
    for (int f = 0; f < 3; ++f) lam.segment(f * m, m) = trace.segment(mesh.element_edges[t][f] * m, m);
    const VectorX x = source[t] - sys.kinv_c[t] * lam;
    field.q.segment(2 * n * t, 2 * n) = x.head(2 * n);
    field.u.segment(n * t, n) = x.tail(n);
  }, sys.options.threads);
  return field;
}

DGField solve_interior(const HDGSystem& sys, const SourceFunction& f, const BoundaryFunction& g,
                       const BoundaryFunction& u0) {
  const auto source = source_responses(sys, f);
  const auto datum = boundary_node_values(sys, g, u0);
  const VectorX trace = solve_trace(sys, assemble_rhs(sys, source, datum));
  return recover_field(sys, source, trace);
}

}  // namespace hdgbem::hdg
