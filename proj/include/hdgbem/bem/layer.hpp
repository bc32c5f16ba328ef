#pragma once

#include "hdgbem/bem/trig.hpp"

namespace hdgbem::bem {

struct LayerOptions {
  bool force_quadrature = false;  // skip the analytic circle path
  bool collocation = false;       // experimental: collocate at t_j instead of Galerkin testing
  int oversampling = 0;           // quadrature grid half-size; 0 picks max(4n, 64)
};

/// Single and double layer operators on T_n for one curve.
///
/// Galerkin blocks use the parametric L2(0, 2pi) pairing:
/// galerkin_V(l, k) = int (V phi_k)(y(t)) phi_l(t) dt with
/// (V f)(y(t)) = int V(s, t) f(s) |y'(s)| ds, and likewise for K.
/// V, K themselves are the coefficient-space operators gram^{-1} galerkin.
struct LayerOperatorSet {
  geometry::Curve curve = geometry::Curve::circle(Point::Zero(), 1.0);
  int n = 0;
  LayerOptions options;
  bool analytic = false;
  MatrixX gram;
  MatrixX galerkin_V, galerkin_K;
  MatrixX V, K;
  ArcLengthWeight weight;
};

/// Kernel values: V(s,t) = -(1/2pi) log|y(s) - y(t)| and the normal
/// derivative of the Green function at y(s), with its curvature limit at s = t.
double single_layer_kernel(const geometry::Curve& curve, double s, double t);
double double_layer_kernel(const geometry::Curve& curve, double s, double t);

LayerOperatorSet assemble_layer_operators(const geometry::Curve& curve, int n, const LayerOptions& options = {});

/// Solves <(1/2 - K) g, psi> = <-V lambda, psi> for all parameter-mean-zero
/// psi, with g in the arclength-mean-zero subspace of T_n.
TrigPolynomial solve_exterior(const LayerOperatorSet& ops, const TrigPolynomial& lambda);

/// (1/2pi) (int V lambda ds + int (1/2 - K) g ds).
double compute_u_infinity(const LayerOperatorSet& ops, const TrigPolynomial& lambda, const TrigPolynomial& g);

/// D g(x) - S lambda(x) + u_inf for x outside the curve.
double evaluate_exterior(const LayerOperatorSet& ops, const TrigPolynomial& g, const TrigPolynomial& lambda,
                         double u_inf, const Point& x, double standoff = -1.0);

}  // namespace hdgbem::bem
