#include "hdgbem/harness/manufactured.hpp"

#include <cmath>

#include "hdgbem/errors.hpp"

namespace hdgbem::harness {

namespace {

template <class S>
S dipole(const Point2<S>& x) {
  return x.x() / (x.x() * x.x() + x.y() * x.y());
}

template <class S>
Point2<S> dipole_gradient(const Point2<S>& x) {
  const S r2 = x.x() * x.x() + x.y() * x.y();
  return Point2<S>((r2 - S(2.0) * x.x() * x.x()) / (r2 * r2), S(-2.0) * x.x() * x.y() / (r2 * r2));
}

// Conductivity bump 1 + 0.5 psi(r), psi = (p / p_max)^3 with
// p = (r - 0.55)(0.95 - r) on its support. C^2 and supported inside the annulus.
constexpr double kBumpInner = 0.55, kBumpOuter = 0.95, kBumpHeight = 0.5;
constexpr double kBumpPeak = 0.04;  // p at r = 0.75

template <class S>
S bump_kappa(const Point2<S>& x) {
  const S r = std::sqrt(x.x() * x.x() + x.y() * x.y());
  const S p = (r - kBumpInner) * (kBumpOuter - r);
  if (std::real(p) <= 0.0) return S(1.0);
  const S z = p / kBumpPeak;
  return S(1.0) + kBumpHeight * z * z * z;
}

double bump_kappa_radial_derivative(double r) {
  const double p = (r - kBumpInner) * (kBumpOuter - r);
  if (p <= 0.0) return 0.0;
  const double dp = kBumpInner + kBumpOuter - 2.0 * r;
  return kBumpHeight * 3.0 * p * p * dp / (kBumpPeak * kBumpPeak * kBumpPeak);
}

Complex one(const ComplexPoint&) { return Complex(1.0); }

}  // namespace

double ManufacturedCase::u(const Point& x) const { return std::real(u_complex(x.cast<Complex>())); }

Point ManufacturedCase::q(const Point& x) const { return q_complex(x.cast<Complex>()).real(); }

hdg::BoundaryFunction ManufacturedCase::boundary_datum() const {
  return [c = *this](const Point& x, double) { return c.u(x); };
}

double ManufacturedCase::lambda_exact(double s) const { return -q(gamma.position(s)).dot(gamma.outward_normal(s)); }

std::vector<std::string> case_ids() {
  return {"dipole", "dipole-plus-constant", "variable-kappa-bump", "polynomial-patch", "constant"};
}

ManufacturedCase manufactured_case(const std::string& id, int degree, double constant) {
  ManufacturedCase c;
  c.id = id;
  c.kappa_complex = one;
  if (id == "dipole" || id == "dipole-plus-constant") {
    const double shift = id == "dipole" ? 0.0 : constant;
    c.u_complex = [shift](const ComplexPoint& x) { return dipole(x) + shift; };
    c.q_complex = [](const ComplexPoint& x) -> ComplexPoint { return -dipole_gradient(x); };
    c.f = [](const Point&) { return 0.0; };
    c.u_infinity = shift;
  } else if (id == "variable-kappa-bump") {
    c.u_complex = [](const ComplexPoint& x) { return dipole(x) + 1.0; };
    c.q_complex = [](const ComplexPoint& x) -> ComplexPoint { return -bump_kappa(x) * dipole_gradient(x); };
    c.kappa_complex = [](const ComplexPoint& x) { return bump_kappa(x); };
    c.f = [](const Point& x) {
      const double r = x.norm();
      return -bump_kappa_radial_derivative(r) * (x / r).dot(dipole_gradient(x));
    };
    c.material = hdg::Material::field([](const Point& x) -> Matrix2 { return bump_kappa(x) * Matrix2::Identity(); },
                                      1.0, 1.0 + kBumpHeight);
    c.u_infinity = 1.0;
  } else if (id == "polynomial-patch") {
    c.has_exterior = false;
    if (degree == 1) {
      c.u_complex = [](const ComplexPoint& x) { return x.x(); };
      c.q_complex = [](const ComplexPoint&) { return ComplexPoint(-1.0, 0.0); };
      c.f = [](const Point&) { return 0.0; };
    } else if (degree == 2) {
      c.u_complex = [](const ComplexPoint& x) {
        return x.x() * x.x() + x.x() * x.y() - 0.5 * x.y() * x.y() + x.x();
      };
      c.q_complex = [](const ComplexPoint& x) {
        return ComplexPoint(-(2.0 * x.x() + x.y() + 1.0), -(x.x() - x.y()));
      };
      c.f = [](const Point&) { return -1.0; };
    } else {
      throw DomainError("polynomial-patch is available for degree 1 and 2");
    }
  } else if (id == "constant") {
    c.u_complex = [constant](const ComplexPoint&) { return Complex(constant); };
    c.q_complex = [](const ComplexPoint&) { return ComplexPoint(0.0, 0.0); };
    c.f = [](const Point&) { return 0.0; };
    c.u_infinity = constant;
  } else {
    throw ConfigError("problem.case: unknown case '" + id + "'");
  }
  return c;
}

double pde_residual(const ManufacturedCase& c, const Point& x) {
  constexpr double step = 1e-30;
  const ComplexPoint z = x.cast<Complex>();
  const ComplexPoint zx(Complex(x.x(), step), x.y());
  const ComplexPoint zy(x.x(), Complex(x.y(), step));
  const Point grad(std::imag(c.u_complex(zx)) / step, std::imag(c.u_complex(zy)) / step);
  const double div = std::imag(c.q_complex(zx).x()) / step + std::imag(c.q_complex(zy).y()) / step;
  const Point q = c.q_complex(z).real();
  const double kappa = std::real(c.kappa_complex(z));
  const double f = c.f(x);
  const double r1 = (q / kappa + grad).norm();
  const double r2 = std::abs(div - f);
  return std::max(r1, r2) / (1.0 + q.norm() + std::abs(f));
}

}  // namespace hdgbem::harness
