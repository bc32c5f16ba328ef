#include "hdgbem/bem/trig.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "hdgbem/errors.hpp"

namespace hdgbem::bem {

TrigPolynomial::TrigPolynomial(int n, VectorX coefficients, bool mean_zero)
    : n_(n), c_(std::move(coefficients)), mean_zero_(mean_zero) {
  if (c_.size() != 2 * n) throw DimensionError("trigonometric coefficient vector must have length 2n");
}

std::vector<double> TrigPolynomial::nodes(int n) {
  std::vector<double> t(2 * n);
  for (int j = 0; j < 2 * n; ++j) t[j] = j * kPi / n;
  return t;
}

TrigPolynomial TrigPolynomial::interpolate(const VectorX& f) {
  if (f.size() < 2 || f.size() % 2 != 0) throw DimensionError("interpolation needs an even number of samples");
  const int n = int(f.size() / 2);
  VectorX c = VectorX::Zero(2 * n);
  for (int j = 0; j < 2 * n; ++j) {
    const double t = j * kPi / n;
    c[0] += f[j];
    c[n] += (j % 2 == 0 ? 1.0 : -1.0) * f[j];
    for (int m = 1; m < n; ++m) {
      c[m] += f[j] * std::cos(m * t);
      c[n + m] += f[j] * std::sin(m * t);
    }
  }
  c[0] /= 2.0 * n;
  c[n] /= 2.0 * n;
  for (int m = 1; m < n; ++m) {
    c[m] /= n;
    c[n + m] /= n;
  }
  return TrigPolynomial(n, c);
}

VectorX TrigPolynomial::basis_values(int n, double t) {
  VectorX v(2 * n);
  v[0] = 1.0;
  for (int m = 1; m <= n; ++m) v[m] = std::cos(m * t);
  for (int m = 1; m < n; ++m) v[n + m] = std::sin(m * t);
  return v;
}

double TrigPolynomial::operator()(double t) const { return basis_values(n_, t).dot(c_); }

VectorX TrigPolynomial::samples() const {
  VectorX s(2 * n_);
  for (int j = 0; j < 2 * n_; ++j) s[j] = (*this)(j * kPi / n_);
  return s;
}

TrigPolynomial relax(const TrigPolynomial& previous, const TrigPolynomial& next, double omega) {
  if (previous.degree() != next.degree()) throw DimensionError("relaxation needs polynomials of equal degree");
  TrigPolynomial out(next.degree(), omega * next.coefficients() + (1.0 - omega) * previous.coefficients());
  out.set_mean_zero(previous.mean_zero() && next.mean_zero());
  return out;
}

ArcLengthWeight::ArcLengthWeight(const geometry::Curve& curve, int n) {
  w_ = VectorX::Zero(2 * n);
  if (curve.is_circle()) {
    w_[0] = kTwoPi * curve.radius();
    return;
  }
  // Trapezoid on a grid fine enough to resolve the speed; spectrally accurate.
  const int m = std::max(8 * n, 1024);
  for (int i = 0; i < m; ++i) {
    const double s = kTwoPi * i / m;
    w_ += (kTwoPi / m) * curve.speed(s) * TrigPolynomial::basis_values(n, s);
  }
}

TrigPolynomial project_mean_zero(const ArcLengthWeight& weight, const TrigPolynomial& p) {
  const int n = weight.degree();
  // Already projected: returning it untouched keeps the projection exactly idempotent.
  if (p.mean_zero() && p.degree() == n) return p;
  VectorX c = VectorX::Zero(2 * n);
  const int keep = std::min(n, p.degree());
  for (int m = 0; m <= keep; ++m) c[m] = p.cos_coefficient(m);
  for (int m = 1; m < keep; ++m) c[n + m] = p.sin_coefficient(m);
  if (keep == n && n > 0) c[n] = p.cos_coefficient(n);
  const bool parameter_mean = weight.weights().tail(2 * n - 1).isZero(0.0);
  if (parameter_mean) {
    c[0] = 0.0;
  } else {
    c[0] -= weight(c) / weight.length();
  }
  return TrigPolynomial(n, c, true);
}

TrigPolynomial project_mean_zero(const ArcLengthWeight& weight, const VectorX& samples) {
  if (samples.size() != 2 * weight.degree()) {
    throw DimensionError("expected " + std::to_string(2 * weight.degree()) + " samples, got " +
                         std::to_string(samples.size()));
  }
  return project_mean_zero(weight, TrigPolynomial::interpolate(samples));
}

void write_density_csv(std::ostream& out, const TrigPolynomial& p) {
  out << "mode,cos,sin\n" << std::setprecision(17);
  for (int m = 0; m <= p.degree(); ++m) out << m << ',' << p.cos_coefficient(m) << ',' << p.sin_coefficient(m) << '\n';
}

}  // namespace hdgbem::bem
