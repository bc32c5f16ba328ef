#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "hdgbem/hdg/system.hpp"

namespace hdgbem::hdg {

using VectorFunction = std::function<Point(const Point&)>;

/// Sparse map from flux coefficients to (E q_h . n)(y(s)) on the outer curve,
/// one row per curve parameter. Each point is evaluated with the parent
/// element of the extension patch that holds it.
Eigen::SparseMatrix<double> flux_extrapolation_operator(const HDGSystem& sys, const geometry::Curve& gamma,
                                                        const std::vector<double>& s);

VectorX extrapolate_flux(const DGField& field, const std::vector<ExtensionPatch>& patches,
                         const geometry::Curve& gamma, const std::vector<double>& s);

double j_functional(const DGField& field, const HDGSystem& sys);

/// Per element |<qhat . nu_h, 1>_dT - (f, 1)_T| / (int_T |f| + 1).
VectorX conservation_residuals(const HDGSystem& sys, const DGField& field, const SourceFunction& f);

/// Largest L2(e) norm of uhat - [[q]] / (2 tau) - {{u}} over interior edges.
double trace_identity_defect(const HDGSystem& sys, const DGField& field);

struct FieldErrors {
  double q = 0.0;  // || kappa^{-1/2} (q - q_h) ||
  double u = 0.0;  // || u - u_h ||
};
FieldErrors l2_errors(const HDGSystem& sys, const DGField& field, const VectorFunction& q_exact,
                      const SourceFunction& u_exact);

/// Solves the eliminated (q, u) form of the scheme with jump and average
/// terms assembled directly, without hybridisation. Used as an oracle for
/// the condensed solver; uhat is reconstructed from the trace identity.
DGField solve_mixed_form(const HDGSystem& sys, const SourceFunction& f, const BoundaryFunction& g,
                         const BoundaryFunction& u0);

/// Element-wise HDG projection: moments against P_{k-1} and the face
/// condition <Pi_v q . n + tau Pi_w u, mu>_e = <q . n + tau u, mu>_e.
struct HDGProjection {
  ElementBasis basis;
  VectorX q;  // [q_x; q_y]
  VectorX u;
};
HDGProjection hdg_projection(const VectorFunction& q, const SourceFunction& u, const std::array<Point, 3>& vertices,
                             const std::array<double, 3>& tau, int k);

/// Legacy VTK unstructured grid with u_h and q_h on a refined subtriangulation.
void write_vtk(std::ostream& out, const HDGSystem& sys, const DGField& field, int subdivisions = 0);
/// One row per element: element id followed by its q_x, q_y and u coefficients.
void write_coefficients_csv(std::ostream& out, const DGField& field);

}  // namespace hdgbem::hdg
