#include "hdgbem/hdg/diagnostics.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "hdgbem/errors.hpp"
#include "hdgbem/quadrature.hpp"

namespace hdgbem::hdg {

using geometry::BoundaryTag;

Eigen::SparseMatrix<double> flux_extrapolation_operator(const HDGSystem& sys, const geometry::Curve& gamma,
                                                        const std::vector<double>& s) {
  const int n = sys.np();
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t r = 0; r < s.size(); ++r) {
    const int pi = geometry::locate_patch(sys.patches, BoundaryTag::gamma, s[r]);
    if (pi < 0) {
      std::ostringstream msg;
      msg << "curve parameter " << s[r] << " is not covered by any extension patch";
      throw CoverageError(msg.str());
    }
    const int t = sys.patches[pi].element;
    const Point nrm = gamma.outward_normal(s[r]);
    const VectorX phi = (*sys.basis)[t].values(gamma.position(s[r]));
    for (int i = 0; i < n; ++i) {
      trip.emplace_back(int(r), 2 * n * t + i, phi[i] * nrm.x());
      trip.emplace_back(int(r), 2 * n * t + n + i, phi[i] * nrm.y());
    }
  }
  Eigen::SparseMatrix<double> op(int(s.size()), 2 * n * sys.mesh.num_elements());
  op.setFromTriplets(trip.begin(), trip.end());
  return op;
}

VectorX extrapolate_flux(const DGField& field, const std::vector<ExtensionPatch>& patches,
                         const geometry::Curve& gamma, const std::vector<double>& s) {
  VectorX out(s.size());
  for (std::size_t r = 0; r < s.size(); ++r) {
    const int pi = geometry::locate_patch(patches, BoundaryTag::gamma, s[r]);
    if (pi < 0) {
      std::ostringstream msg;
      msg << "curve parameter " << s[r] << " is not covered by any extension patch";
      throw CoverageError(msg.str());
    }
    out[r] = field.q_at(patches[pi].element, gamma.position(s[r])).dot(gamma.outward_normal(s[r]));
  }
  return out;
}

namespace {

struct EdgeSide {
  int element;
  Point nu;
};

template <typename Fn>
void for_edge_nodes(const UnfittedMesh& mesh, int e, int order, Fn&& fn) {
  const auto rule = gauss_legendre<double>(order);
  const Point p0 = mesh.vertices[mesh.edges[e].vertices[0]];
  const Point p1 = mesh.vertices[mesh.edges[e].vertices[1]];
  const double len = (p1 - p0).norm();
  for (std::size_t q = 0; q < rule.size(); ++q) fn(p0 + rule.nodes[q] * (p1 - p0), rule.nodes[q], rule.weights[q] * len);
}

}  // namespace

double j_functional(const DGField& field, const HDGSystem& sys) {
  const auto& mesh = sys.mesh;
  const int k = field.k;
  double sum = 0.0;
  const auto rule = triangle_rule<double>(2 * k + 2);
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const auto& b = (*field.basis)[t];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = b.map(rule.nodes[q]);
      const Point qh = field.q_at(t, x);
      sum += 2.0 * b.area() * rule.weights[q] * qh.dot(sys.material.inverse(x) * qh);
    }
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& edge = mesh.edges[e];
    const double tau = sys.tau.tau[e];
    for_edge_nodes(mesh, e, k + 2, [&](const Point& x, double, double w) {
      if (edge.is_boundary()) {
        const double u = field.u_at(edge.elements[0], x);
        sum += w * tau * u * u;
        return;
      }
      const int a = edge.elements[0], c = edge.elements[1];
      const Point nu = mesh.element_normal(a, edge.local_index[0]);
      const double ua = field.u_at(a, x), uc = field.u_at(c, x);
      const double avg = 0.5 * (ua + uc);
      const double jump = (field.q_at(a, x) - field.q_at(c, x)).dot(nu);
      sum += w * tau * ((ua - avg) * (ua - avg) + (uc - avg) * (uc - avg));
      sum += w * jump * jump / tau;
    });
  }
  return std::sqrt(sum);
}

VectorX conservation_residuals(const HDGSystem& sys, const DGField& field, const SourceFunction& f) {
  const auto& mesh = sys.mesh;
  const int k = field.k;
  VectorX out(mesh.num_elements());
  const auto rule = triangle_rule<double>(2 * k + 4);
  for (int t = 0; t < mesh.num_elements(); ++t) {
    double flux = 0.0;
    for (int lf = 0; lf < 3; ++lf) {
      const int e = mesh.element_edges[t][lf];
      const Point nu = mesh.element_normal(t, lf);
      const double tau = sys.tau.tau[e];
      for_edge_nodes(mesh, e, k + 2, [&](const Point& x, double xi, double w) {
        flux += w * (field.q_at(t, x).dot(nu) + tau * (field.u_at(t, x) - field.uhat_at(e, xi)));
      });
    }
    double source = 0.0, scale = 1.0;
    if (f) {
      const auto& b = (*field.basis)[t];
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double v = f(b.map(rule.nodes[q]));
        source += 2.0 * b.area() * rule.weights[q] * v;
        scale += 2.0 * b.area() * rule.weights[q] * std::abs(v);
      }
    }
    out[t] = std::abs(flux - source) / scale;
  }
  return out;
}

double trace_identity_defect(const HDGSystem& sys, const DGField& field) {
  const auto& mesh = sys.mesh;
  double worst = 0.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& edge = mesh.edges[e];
    if (edge.is_boundary()) continue;
    const int a = edge.elements[0], c = edge.elements[1];
    const Point nu = mesh.element_normal(a, edge.local_index[0]);
    const double tau = sys.tau.tau[e];
    double sum = 0.0;
    for_edge_nodes(mesh, e, field.k + 2, [&](const Point& x, double xi, double w) {
      const double jump = (field.q_at(a, x) - field.q_at(c, x)).dot(nu);
      const double d = field.uhat_at(e, xi) - 0.5 * jump / tau - 0.5 * (field.u_at(a, x) + field.u_at(c, x));
      sum += w * d * d;
    });
    worst = std::max(worst, std::sqrt(sum));
  }
  return worst;
}

FieldErrors l2_errors(const HDGSystem& sys, const DGField& field, const VectorFunction& q_exact,
                      const SourceFunction& u_exact) {
  const auto rule = triangle_rule<double>(2 * field.k + 4);
  FieldErrors err;
  for (int t = 0; t < sys.mesh.num_elements(); ++t) {
    const auto& b = (*field.basis)[t];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = b.map(rule.nodes[q]);
      const double w = 2.0 * b.area() * rule.weights[q];
      const Point dq = q_exact(x) - field.q_at(t, x);
      const double du = u_exact(x) - field.u_at(t, x);
      err.q += w * dq.dot(sys.material.inverse(x) * dq);
      err.u += w * du * du;
    }
  }
  err.q = std::sqrt(err.q);
  err.u = std::sqrt(err.u);
  return err;
}

DGField solve_mixed_form(const HDGSystem& sys, const SourceFunction& f, const BoundaryFunction& g,
                         const BoundaryFunction& u0) {
  const auto& mesh = sys.mesh;
  const int k = sys.k;
  const int n = sys.np();
  const int m = k + 1;
  const int ne = mesh.num_elements();
  const int stride = 3 * n;
  std::vector<Eigen::Triplet<double>> trip;
  VectorX rhs = VectorX::Zero(stride * ne);
  auto add_block = [&](int row0, int col0, const MatrixX& blk) {
    for (int i = 0; i < blk.rows(); ++i)
      for (int j = 0; j < blk.cols(); ++j)
        if (blk(i, j) != 0.0) trip.emplace_back(row0 + i, col0 + j, blk(i, j));
  };

  const auto rule = triangle_rule<double>(2 * k + 4);
  for (int t = 0; t < ne; ++t) {
    const LocalBlocks b = assemble_local(mesh, t, (*sys.basis)[t], sys.material, sys.tau, k);
    const int o = stride * t;
    add_block(o, o, b.mass_kinv);
    add_block(o, o + 2 * n, -b.div.transpose());
    add_block(o + 2 * n, o, -b.div);
    add_block(o + 2 * n, o + 2 * n, -b.stab);
    if (f) {
      const auto& eb = (*sys.basis)[t];
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point x = eb.map(rule.nodes[q]);
        rhs.segment(o + 2 * n, n) -= (2.0 * eb.area() * rule.weights[q] * f(x)) * eb.values(x);
      }
    }
  }

  // Interior edges: jump penalty, jump-average couplings and the average term of C_h.
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& edge = mesh.edges[e];
    if (edge.is_boundary()) continue;
    const double tau = sys.tau.tau[e];
    const int side[2] = {edge.elements[0], edge.elements[1]};
    const Point nu0 = mesh.element_normal(side[0], edge.local_index[0]);
    for_edge_nodes(mesh, e, k + 2, [&](const Point& x, double, double w) {
      VectorX phi[2], a[2];
      for (int s = 0; s < 2; ++s) {
        phi[s] = (*sys.basis)[side[s]].values(x);
        const Point nu = s == 0 ? nu0 : Point(-nu0);
        a[s].resize(2 * n);
        a[s] << nu.x() * phi[s], nu.y() * phi[s];
      }
      for (int s = 0; s < 2; ++s) {
        for (int r = 0; r < 2; ++r) {
          const int os = stride * side[s], orr = stride * side[r];
          add_block(os, orr, (0.5 * w / tau) * a[s] * a[r].transpose());
          add_block(os, orr + 2 * n, (0.5 * w) * a[s] * phi[r].transpose());
          add_block(os + 2 * n, orr, (0.5 * w) * phi[s] * a[r].transpose());
          add_block(os + 2 * n, orr + 2 * n, (0.5 * w * tau) * phi[s] * phi[r].transpose());
        }
      }
    });
  }

  // Boundary edges: transfer couplings and the transferred datum.
  const auto datum = boundary_node_values(sys, g, u0);
  for (std::size_t bi = 0; bi < sys.bmap.edges.size(); ++bi) {
    const auto& em = sys.bmap.edges[bi];
    const int t = em.element;
    const int o = stride * t;
    const double tau = sys.tau.tau[em.edge];
    if (sys.options.include_transfer) {
      add_block(o, o, sys.transfer[bi].A_T);
      add_block(o + 2 * n, o, sys.transfer[bi].B_T);
    }
    for (std::size_t j = 0; j < em.x.size(); ++j) {
      const VectorX phi = (*sys.basis)[t].values(em.x[j]);
      const double wd = em.weights[j] * datum[bi][j];
      rhs.segment(o, n) -= wd * em.nu_h.x() * phi;
      rhs.segment(o + n, n) -= wd * em.nu_h.y() * phi;
      rhs.segment(o + 2 * n, n) -= tau * wd * phi;
    }
  }

  Eigen::SparseMatrix<double> A(stride * ne, stride * ne);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw OracleError("mixed-form system is singular");
  const VectorX x = lu.solve(rhs);

  DGField field;
  field.k = k;
  field.basis = sys.basis;
  field.q.resize(2 * n * ne);
  field.u.resize(n * ne);
  for (int t = 0; t < ne; ++t) {
    field.q.segment(2 * n * t, 2 * n) = x.segment(stride * t, 2 * n);
    field.u.segment(n * t, n) = x.segment(stride * t + 2 * n, n);
  }
  field.uhat = VectorX::Zero(sys.trace_size());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& edge = mesh.edges[e];
    const double len = mesh.edge_length(e);
    const int bi = mesh.boundary_position[e];
    if (bi >= 0) {
      const int t = edge.elements[0];
      VectorX proj = sys.transfer[bi].load * datum[bi];
      if (sys.options.include_transfer) proj += sys.transfer[bi].P * field.q.segment(2 * n * t, 2 * n);
      field.uhat.segment(e * m, m) = proj / len;
      continue;
    }
    const int a = edge.elements[0], c = edge.elements[1];
    const Point nu = mesh.element_normal(a, edge.local_index[0]);
    const double tau = sys.tau.tau[e];
    VectorX proj = VectorX::Zero(m);
    for_edge_nodes(mesh, e, k + 2, [&](const Point& x, double xi, double w) {
      const double jump = (field.q_at(a, x) - field.q_at(c, x)).dot(nu);
      proj += w * (0.5 * jump / tau + 0.5 * (field.u_at(a, x) + field.u_at(c, x))) * edge_basis(k, xi);
    });
    field.uhat.segment(e * m, m) = proj / len;
  }
  return field;
}

HDGProjection hdg_projection(const VectorFunction& q, const SourceFunction& u, const std::array<Point, 3>& vertices,
                             const std::array<double, 3>& tau, int k) {
  HDGProjection out;
  out.basis = ElementBasis(vertices, k);
  const auto& b = out.basis;
  const int n = dim_p(k);
  const int nl = dim_p(k - 1);
  MatrixX A = MatrixX::Zero(3 * n, 3 * n);
  VectorX rhs = VectorX::Zero(3 * n);
  int row = 0;
  const auto rule = triangle_rule<double>(2 * k + 10);
  // Moment conditions against P_{k-1}; the basis is orthogonal with mass |T|.
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < nl; ++i, ++row) A(row, c * n + i) = b.area();
  for (int i = 0; i < nl; ++i, ++row) A(row, 2 * n + i) = b.area();
  for (std::size_t p = 0; p < rule.size(); ++p) {
    const Point x = b.map(rule.nodes[p]);
    const double w = 2.0 * b.area() * rule.weights[p];
    const VectorX phi = b.values(x);
    const Point qx = q(x);
    const double ux = u(x);
    for (int i = 0; i < nl; ++i) {
      rhs[i] += w * qx.x() * phi[i];
      rhs[nl + i] += w * qx.y() * phi[i];
      rhs[2 * nl + i] += w * ux * phi[i];
    }
  }
  const auto face_rule = gauss_legendre<double>(k + 8);
  for (int f = 0; f < 3; ++f) {
    const Point p0 = vertices[(f + 1) % 3], p1 = vertices[(f + 2) % 3];
    const double len = (p1 - p0).norm();
    const double orient = cross2(vertices[1] - vertices[0], vertices[2] - vertices[0]) > 0.0 ? 1.0 : -1.0;
    const Point d = (p1 - p0) / len;
    const Point nu = orient * Point(d.y(), -d.x());
    for (std::size_t p = 0; p < face_rule.size(); ++p) {
      const double xi = face_rule.nodes[p];
      const double w = face_rule.weights[p] * len;
      const Point x = p0 + xi * (p1 - p0);
      const VectorX phi = b.values(x);
      const VectorX psi = edge_basis(k, xi);
      const Point qx = q(x);
      const double target = qx.dot(nu) + tau[f] * u(x);
      for (int a = 0; a <= k; ++a) {
        const int r = row + a;
        A.block(r, 0, 1, n) += (w * psi[a] * nu.x()) * phi.transpose();
        A.block(r, n, 1, n) += (w * psi[a] * nu.y()) * phi.transpose();
        A.block(r, 2 * n, 1, n) += (w * psi[a] * tau[f]) * phi.transpose();
        rhs[r] += w * psi[a] * target;
      }
    }
    row += k + 1;
  }
  Eigen::FullPivLU<MatrixX> lu(A);
  lu.setThreshold(1e-12);
  if (lu.rank() < A.rows()) throw OracleError("HDG projection system is singular for the given stabilization");
  const VectorX x = lu.solve(rhs);
  out.q = x.head(2 * n);
  out.u = x.tail(n);
  return out;
}

void write_vtk(std::ostream& out, const HDGSystem& sys, const DGField& field, int subdivisions) {
  const auto& mesh = sys.mesh;
  const int s = subdivisions > 0 ? subdivisions : std::max(1, field.k);
  std::vector<Point> ref;
  std::vector<std::array<int, 3>> local;
  auto id = [s](int i, int j) { return j * (s + 1) - j * (j - 1) / 2 + i; };
  for (int j = 0; j <= s; ++j)
    for (int i = 0; i + j <= s; ++i) ref.emplace_back(double(i) / s, double(j) / s);
  for (int j = 0; j < s; ++j)
    for (int i = 0; i + j < s; ++i) {
      local.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
      if (i + j + 1 < s) local.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  const int ne = mesh.num_elements();
  const std::size_t np = ref.size() * ne, nc = local.size() * ne;
  out << "# vtk DataFile Version 3.0\nhdg field\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << std::setprecision(12);
  out << "POINTS " << np << " double\n";
  for (int t = 0; t < ne; ++t)
    for (const auto& r : ref) {
      const Point x = (*field.basis)[t].map(r);
      out << x.x() << ' ' << x.y() << " 0\n";
    }
  out << "CELLS " << nc << ' ' << 4 * nc << '\n';
  for (int t = 0; t < ne; ++t)
    for (const auto& c : local) {
      const std::size_t o = ref.size() * t;
      out << "3 " << o + c[0] << ' ' << o + c[1] << ' ' << o + c[2] << '\n';
    }
  out << "CELL_TYPES " << nc << '\n';
  for (std::size_t c = 0; c < nc; ++c) out << "5\n";
  out << "POINT_DATA " << np << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
  for (int t = 0; t < ne; ++t)
    for (const auto& r : ref) out << field.u_at(t, (*field.basis)[t].map(r)) << '\n';
  out << "VECTORS q double\n";
  for (int t = 0; t < ne; ++t)
    for (const auto& r : ref) {
      const Point q = field.q_at(t, (*field.basis)[t].map(r));
      out << q.x() << ' ' << q.y() << " 0\n";
    }
}

void write_coefficients_csv(std::ostream& out, const DGField& field) {
  const int n = field.np();
  out << "element";
  for (const char* name : {"qx", "qy", "u"})
    for (int i = 0; i < n; ++i) out << ',' << name << i;
  out << '\n' << std::setprecision(17);
  for (int t = 0; t < field.num_elements(); ++t) {
    out << t;
    for (int i = 0; i < 2 * n; ++i) out << ',' << field.q[2 * n * t + i];
    for (int i = 0; i < n; ++i) out << ',' << field.u[n * t + i];
    out << '\n';
  }
}

}  // namespace hdgbem::hdg
