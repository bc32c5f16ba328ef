#pragma once

#include <iosfwd>
#include <vector>

#include "hdgbem/geometry/curve.hpp"

namespace hdgbem::bem {

/// p(t) = a_0 + sum_{m=1}^{n} a_m cos(mt) + sum_{m=1}^{n-1} b_m sin(mt),
/// stored as [a_0, ..., a_n, b_1, ..., b_{n-1}] (length 2n).
class TrigPolynomial {
 public:
  TrigPolynomial() = default;
  explicit TrigPolynomial(int n) : n_(n), c_(VectorX::Zero(2 * n)) {}
  TrigPolynomial(int n, VectorX coefficients, bool mean_zero = false);

  /// Interpolant through 2n samples at t_j = j pi / n.
  static TrigPolynomial interpolate(const VectorX& samples);
  static std::vector<double> nodes(int n);

  int degree() const { return n_; }
  const VectorX& coefficients() const { return c_; }
  VectorX& coefficients() { return c_; }
  double cos_coefficient(int m) const { return c_[m]; }
  double sin_coefficient(int m) const { return (m >= 1 && m < n_) ? c_[n_ + m] : 0.0; }
  bool mean_zero() const { return mean_zero_; }
  void set_mean_zero(bool flag) { mean_zero_ = flag; }

  double operator()(double t) const;
  VectorX samples() const;
  /// Values of every basis function at t, in coefficient order.
  static VectorX basis_values(int n, double t);

 private:
  int n_ = 0;
  VectorX c_;
  bool mean_zero_ = false;
};

/// Coefficient-wise omega * next + (1 - omega) * previous.
TrigPolynomial relax(const TrigPolynomial& previous, const TrigPolynomial& next, double omega);

/// Linear functional W(p) = int_0^{2pi} p(s) |y'(s)| ds on T_n.
class ArcLengthWeight {
 public:
  ArcLengthWeight() = default;
  ArcLengthWeight(const geometry::Curve& curve, int n);
  double operator()(const TrigPolynomial& p) const { return w_.dot(p.coefficients()); }
  double operator()(const VectorX& coefficients) const { return w_.dot(coefficients); }
  const VectorX& weights() const { return w_; }
  double length() const { return w_[0]; }
  /// Weighted mean W(p) / W(1).
  double mean(const TrigPolynomial& p) const { return (*this)(p) / length(); }
  int degree() const { return int(w_.size() / 2); }

 private:
  VectorX w_;
};

/// Truncates to degree n and removes the arclength-weighted mean.
TrigPolynomial project_mean_zero(const ArcLengthWeight& weight, const TrigPolynomial& p);
/// Interpolates 2n equispaced samples, then removes the weighted mean.
TrigPolynomial project_mean_zero(const ArcLengthWeight& weight, const VectorX& samples);

/// Rows "mode,cos,sin".
void write_density_csv(std::ostream& out, const TrigPolynomial& p);

}  // namespace hdgbem::bem
