#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "hdgbem/geometry/boundary_map.hpp"
#include "hdgbem/hdg/basis.hpp"

namespace hdgbem::hdg {

using geometry::BoundaryMap;
using geometry::EdgeTransfer;
using geometry::ExtensionPatch;
using geometry::UnfittedMesh;

/// Symmetric positive definite conductivity.
struct Material {
  std::function<Matrix2(const Point&)> kappa;
  double lower = 1.0;
  double upper = 1.0;
  bool constant = true;

  Matrix2 operator()(const Point& x) const { return kappa ? kappa(x) : Matrix2::Identity(); }
  Matrix2 inverse(const Point& x) const { return (*this)(x).inverse(); }

  static Material identity() { return Material{}; }
  static Material scalar(double c);
  static Material field(std::function<Matrix2(const Point&)> kappa, double lower, double upper);
};

/// Piecewise constant stabilisation, one value per mesh edge (shared by both sides).
struct Stabilization {
  VectorX tau;
  static Stabilization uniform(const UnfittedMesh& mesh, double value);
  double max() const { return tau.maxCoeff(); }
};

/// Element unknowns are ordered [q_x (np), q_y (np), u (np)] in the
/// element's ElementBasis; traces are blocks of k+1 Legendre coefficients
/// per edge, indexed by edge id.
struct DGField {
  int k = 0;
  std::shared_ptr<const std::vector<ElementBasis>> basis;
  VectorX q, u, uhat;

  int np() const { return dim_p(k); }
  int num_elements() const { return basis ? int(basis->size()) : 0; }
  Point q_at(int t, const Point& x) const;
  double u_at(int t, const Point& x) const;
  double uhat_at(int edge, double xi) const;
};

using SourceFunction = std::function<double(const Point&)>;
/// Boundary datum evaluated at a curve point given with its curve parameter.
using BoundaryFunction = std::function<double(const Point&, double)>;

struct LocalBlocks {
  MatrixX mass_kinv;                   // (kappa^{-1} q, v), 2np x 2np
  MatrixX div;                         // D(i, c np + j) = (phi_i, d_c phi_j), np x 2np
  MatrixX stab;                        // sum_f tau_f <phi_j, phi_i>_f, np x np
  std::array<MatrixX, 3> face_u;       // <phi_i, psi_a>_f, np x (k+1)
  std::array<MatrixX, 3> face_q;       // <phi_i nu_c, psi_a>_f, 2np x (k+1)
  std::array<MatrixX, 3> face_mass;    // <phi_i, phi_j>_f, np x np
  MatrixX K;                           // local solver matrix, 3np x 3np
  MatrixX C;                           // trace coupling, 3np x 3(k+1)
};

LocalBlocks assemble_local(const UnfittedMesh& mesh, int element, const ElementBasis& basis, const Material& material,
                           const Stabilization& tau, int k);

struct TransferBlocks {
  MatrixX node_operator;  // path integral of kappa^{-1} E q . t at each edge node, nodes x 2np
  MatrixX A_T;            // 2np x 2np, test v . nu_h
  MatrixX B_T;            // np x 2np, test tau w
  MatrixX P;              // (k+1) x 2np, test psi_a
  MatrixX load;           // (k+1) x nodes, <datum, psi_a> from nodal datum values
  bool zero = true;       // all path lengths vanish
};

TransferBlocks assemble_transfer(const EdgeTransfer& map, const ExtensionPatch& patch, const ElementBasis& parent,
                                 const Material& material, double tau, int k);

struct SystemOptions {
  bool include_transfer = true;
  int threads = 0;  // 0: hardware concurrency, 1: deterministic sequential reference
};

/// Statically condensed HDG system on all edge traces. The transfer term is
/// part of the matrix; the factorization is computed once.
class HDGSystem {
 public:
  int k = 1;
  UnfittedMesh mesh;
  BoundaryMap bmap;
  std::vector<ExtensionPatch> patches;
  Material material;
  Stabilization tau;
  SystemOptions options;
  std::shared_ptr<const std::vector<ElementBasis>> basis;
  std::vector<Eigen::PartialPivLU<MatrixX>> local_lu;
  std::vector<MatrixX> kinv_c;
  std::vector<std::array<MatrixX, 3>> flux_rows;  // <q.nu + tau u, psi_a>_f as rows over element unknowns
  std::vector<TransferBlocks> transfer;  // parallel to mesh.boundary_edges
  Eigen::SparseMatrix<double> matrix;
  std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> solver;

  int np() const { return dim_p(k); }
  int trace_size() const { return mesh.num_edges() * (k + 1); }
  int trace_offset(int edge) const { return edge * (k + 1); }
};

std::shared_ptr<HDGSystem> build_system(const UnfittedMesh& mesh, const BoundaryMap& bmap,
                                        const std::vector<ExtensionPatch>& patches, const Material& material,
                                        const Stabilization& tau, int k, const SystemOptions& options = {});

/// Per-element K^{-1} F for the source term.
std::vector<VectorX> source_responses(const HDGSystem& sys, const SourceFunction& f);

/// Nodal boundary datum (g on outer edges, u0 on inner edges) at every map node.
std::vector<VectorX> boundary_node_values(const HDGSystem& sys, const BoundaryFunction& g, const BoundaryFunction& u0);

VectorX assemble_rhs(const HDGSystem& sys, const std::vector<VectorX>& source, const std::vector<VectorX>& datum);
DGField recover_field(const HDGSystem& sys, const std::vector<VectorX>& source, const VectorX& trace);
VectorX solve_trace(const HDGSystem& sys, const VectorX& rhs);

DGField solve_interior(const HDGSystem& sys, const SourceFunction& f, const BoundaryFunction& g,
                       const BoundaryFunction& u0);

}  // namespace hdgbem::hdg
