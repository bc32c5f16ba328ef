#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "hdgbem/geometry/curve.hpp"
#include "hdgbem/hdg/system.hpp"

namespace hdgbem::harness {

using Complex = std::complex<double>;
using ComplexPoint = Point2<Complex>;

/// Exact solution of the interior/exterior problem together with the data it
/// induces. Every field is also available with complex arguments so that
/// derivatives can be taken by complex step.
struct ManufacturedCase {
  std::string id;
  geometry::Curve gamma = geometry::Curve::circle(Point::Zero(), 1.0);
  geometry::Curve gamma0 = geometry::Curve::circle(Point::Zero(), 0.5);
  hdg::Material material;

  std::function<Complex(const ComplexPoint&)> u_complex;
  std::function<ComplexPoint(const ComplexPoint&)> q_complex;
  std::function<Complex(const ComplexPoint&)> kappa_complex;  // scalar conductivity
  std::function<double(const Point&)> f;

  double u_infinity = 0.0;
  bool has_exterior = true;  // false: u grows at infinity, only the interior problem is meaningful

  double u(const Point& x) const;
  Point q(const Point& x) const;
  hdg::BoundaryFunction boundary_datum() const;
  /// Normal derivative of u on the outer curve along its outward normal.
  double lambda_exact(double s) const;
  double g_exact(double s) const { return u(gamma.position(s)); }
};

/// Known ids: dipole, dipole-plus-constant, variable-kappa-bump,
/// polynomial-patch, constant. `degree` selects the polynomial of the patch
/// case; `constant` is the far-field value of the dipole-plus-constant and
/// constant cases.
ManufacturedCase manufactured_case(const std::string& id, int degree = 1, double constant = 3.0);
std::vector<std::string> case_ids();

/// max(|kappa^{-1} q + grad u|, |div q - f|) / (1 + |q| + |f|) at x, with
/// derivatives by complex step.
double pde_residual(const ManufacturedCase& c, const Point& x);

}  // namespace hdgbem::harness
