#include "hdgbem/bem/layer.hpp"

#include <cmath>
#include <sstream>

#include "hdgbem/errors.hpp"

namespace hdgbem::bem {

using geometry::Curve;

double single_layer_kernel(const Curve& curve, double s, double t) {
  return -std::log((curve.position(s) - curve.position(t)).norm()) / kTwoPi;
}

double double_layer_kernel(const Curve& curve, double s, double t) {
  const Point ys = curve.position(s);
  const Point d = ys - curve.position(t);
  const double r2 = d.squaredNorm();
  const Point n = curve.outward_normal(s);
  if (r2 < 1e-24 * curve.length() * curve.length()) {
    const Point d1 = curve.derivative(s);
    return curve.second_derivative(s).dot(n) / (2.0 * kTwoPi * d1.squaredNorm());
  }
  return -d.dot(n) / (kTwoPi * r2);
}

namespace {

// Smooth remainder of V after removing -(1/2pi) log|2 sin((s - t)/2)|.
double single_layer_smooth(const Curve& curve, double s, double t) {
  const double sn = std::abs(2.0 * std::sin(0.5 * (s - t)));
  if (sn < 1e-12) return -std::log(curve.speed(t)) / kTwoPi;
  return -std::log((curve.position(s) - curve.position(t)).norm() / sn) / kTwoPi;
}

MatrixX gram_matrix(int n) {
  MatrixX g = MatrixX::Identity(2 * n, 2 * n) * kPi;
  g(0, 0) = kTwoPi;
  return g;
}

}  // namespace

LayerOperatorSet assemble_layer_operators(const Curve& curve, int n, const LayerOptions& options) {
  if (n < 2) throw DimensionError("trigonometric degree must be at least 2");
  if (!curve.is_smooth()) throw DimensionError("layer operators need a smooth curve");
  LayerOperatorSet ops;
  ops.curve = curve;
  ops.n = n;
  ops.options = options;
  ops.gram = gram_matrix(n);
  ops.weight = ArcLengthWeight(curve, n);
  const int dim = 2 * n;

  if (curve.is_circle() && !options.force_quadrature) {
    // Fourier-diagonal: V cos(mt) = R/(2m) cos(mt), V 1 = -R log R; K 1 = -1/2, K = 0 on mean-zero modes.
    const double R = curve.radius();
    ops.analytic = true;
    ops.V = MatrixX::Zero(dim, dim);
    ops.K = MatrixX::Zero(dim, dim);
    ops.V(0, 0) = -R * std::log(R);
    ops.K(0, 0) = -0.5;
    for (int m = 1; m <= n; ++m) ops.V(m, m) = R / (2.0 * m);
    for (int m = 1; m < n; ++m) ops.V(n + m, n + m) = R / (2.0 * m);
    ops.galerkin_V = ops.gram * ops.V;
    ops.galerkin_K = ops.gram * ops.K;
    return ops;
  }

  // Quadrature grid s_i = i pi / M with N = 2M points.
  const int M = options.oversampling > 0 ? options.oversampling : std::max(4 * n, 64);
  const int N = 2 * M;
  std::vector<double> s(N), speed(N);
  for (int i = 0; i < N; ++i) {
    s[i] = i * kPi / M;
    speed[i] = curve.speed(s[i]);
  }
  // Log-singular weights: int log(4 sin^2((t - s)/2)) f(s) ds ~ sum_j R_j(t) f(s_j).
  VectorX rw(N);
  for (int d = 0; d < N; ++d) {
    const double tau = d * kPi / M;
    double acc = 0.0;
    for (int m = 1; m < M; ++m) acc += std::cos(m * tau) / m;
    rw[d] = -(kTwoPi / M) * acc - (kPi / (double(M) * M)) * std::cos(M * tau);
  }
  MatrixX VN(N, N), KN(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const int d = ((i - j) % N + N) % N;
      VN(i, j) = (-rw[d] / (2.0 * kTwoPi) + (kTwoPi / N) * single_layer_smooth(curve, s[j], s[i])) * speed[j];
      KN(i, j) = (kTwoPi / N) * double_layer_kernel(curve, s[j], s[i]) * speed[j];
    }
  }
  MatrixX B(N, dim);
  for (int i = 0; i < N; ++i) B.row(i) = TrigPolynomial::basis_values(n, s[i]).transpose();
  const double h = kTwoPi / N;
  ops.galerkin_V = h * B.transpose() * (VN * B);
  ops.galerkin_K = h * B.transpose() * (KN * B);
  const VectorX inv_gram = ops.gram.diagonal().cwiseInverse();
  ops.V = inv_gram.asDiagonal() * ops.galerkin_V;
  ops.K = inv_gram.asDiagonal() * ops.galerkin_K;
  return ops;
}

TrigPolynomial solve_exterior(const LayerOperatorSet& ops, const TrigPolynomial& lambda) {
  const int n = ops.n;
  if (lambda.degree() != n) throw DimensionError("density degree does not match the operator set");
  const int dim = 2 * n;
  // Trial basis phi_k - (W(phi_k)/W(1)) 1, k = 1..2n-1.
  MatrixX trial = MatrixX::Zero(dim, dim - 1);
  for (int k = 1; k < dim; ++k) {
    trial(k, k - 1) = 1.0;
    trial(0, k - 1) = -ops.weight.weights()[k] / ops.weight.length();
  }
  MatrixX A;
  VectorX rhs;
  const MatrixX half_minus_k = 0.5 * ops.gram - ops.galerkin_K;
  if (!ops.options.collocation) {
    A = half_minus_k.bottomRows(dim - 1) * trial;
    rhs = -(ops.galerkin_V * lambda.coefficients()).tail(dim - 1);
  } else {
    // Point values at t_j of (1/2 - K) g + V lambda = u_inf, with u_inf as extra unknown.
    MatrixX E(dim, dim);
    const auto t = TrigPolynomial::nodes(n);
    for (int j = 0; j < dim; ++j) E.row(j) = TrigPolynomial::basis_values(n, t[j]).transpose();
    A = MatrixX::Zero(dim, dim);
    A.leftCols(dim - 1) = E * (0.5 * MatrixX::Identity(dim, dim) - ops.K) * trial;
    A.col(dim - 1).setConstant(-1.0);
    rhs = -E * (ops.V * lambda.coefficients());
  }
  Eigen::FullPivLU<MatrixX> lu(A);
  if (!lu.isInvertible()) throw SolverError("discrete boundary integral equation is singular");
  VectorX y = lu.solve(rhs);
  const double res = (A * y - rhs).norm();
  if (!std::isfinite(res) || res > 1e-10 * std::max(rhs.norm(), 1e-300) + 1e-300) {
    std::ostringstream msg;
    msg << "boundary integral solve residual " << res << " too large";
    throw SolverError(msg.str());
  }
  const VectorX gc = trial * y.head(dim - 1);
  TrigPolynomial g(n, gc, true);
  return g;
}

double compute_u_infinity(const LayerOperatorSet& ops, const TrigPolynomial& lambda, const TrigPolynomial& g) {
  const double v = ops.galerkin_V.row(0).dot(lambda.coefficients());
  const double k = (0.5 * ops.gram.row(0) - ops.galerkin_K.row(0)).dot(g.coefficients());
  return (v + k) / kTwoPi;
}

double evaluate_exterior(const LayerOperatorSet& ops, const TrigPolynomial& g, const TrigPolynomial& lambda,
                         double u_inf, const Point& x, double standoff) {
  const Curve& c = ops.curve;
  if (standoff < 0.0) standoff = 1e-6 * c.diameter();
  if (c.contains(x) || c.distance(x) <= standoff) {
    std::ostringstream msg;
    msg << "point (" << x.x() << ", " << x.y() << ") is not in the exterior domain";
    throw DomainError(msg.str());
  }
  const int m = std::max(4 * ops.n, 256);
  double dl = 0.0, sl = 0.0;
  for (int i = 0; i < m; ++i) {
    const double s = kTwoPi * i / m;
    const Point y = c.position(s);
    const Point d = y - x;
    const double r2 = d.squaredNorm();
    const double w = (kTwoPi / m) * c.speed(s);
    dl += w * (-d.dot(c.outward_normal(s)) / (kTwoPi * r2)) * g(s);
    sl += w * (-0.5 * std::log(r2) / kTwoPi) * lambda(s);
  }
  return dl - sl + u_inf;
}

}  // namespace hdgbem::bem
