#pragma once

#include <cmath>
#include <vector>

#include "hdgbem/types.hpp"

namespace hdgbem {

/// Quadrature rule on [0, 1].
template <typename Scalar>
struct LineRule {
  std::vector<Scalar> nodes;
  std::vector<Scalar> weights;
  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule with `n` points on [0, 1], exact for degree 2n-1.
template <typename Scalar = double>
LineRule<Scalar> gauss_legendre(int n) {
  LineRule<Scalar> rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    Scalar x = std::cos(Scalar(kPi) * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 0;
    for (int it = 0; it < 100; ++it) {
      Scalar p0 = 1, p1 = x;
      for (int j = 2; j <= n; ++j) {
        Scalar p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / Scalar(j);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1;
      }
      dp = Scalar(n) * (x * p1 - p0) / (x * x - Scalar(1));
      Scalar dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < Scalar(1e-16)) break;
    }
    {
      Scalar p0 = 1, p1 = x;
      for (int j = 2; j <= n; ++j) {
        Scalar p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / Scalar(j);
        p0 = p1;
        p1 = p2;
      }
      dp = Scalar(n) * (x * p1 - p0) / (x * x - Scalar(1));
    }
    Scalar w = Scalar(2) / ((Scalar(1) - x * x) * dp * dp);
    rule.nodes[i] = (Scalar(1) - x) / Scalar(2);
    rule.nodes[n - 1 - i] = (Scalar(1) + x) / Scalar(2);
    rule.weights[i] = w / Scalar(2);
    rule.weights[n - 1 - i] = w / Scalar(2);
  }
  return rule;
}

/// Rule on the reference triangle {(0,0),(1,0),(0,1)} built by collapsing a
/// tensor Gauss rule. Exact for total degree `degree`; weights sum to 1/2.
template <typename Scalar = double>
struct TriangleRule {
  std::vector<Point2<Scalar>> nodes;
  std::vector<Scalar> weights;
  std::size_t size() const { return nodes.size(); }
};

template <typename Scalar = double>
TriangleRule<Scalar> triangle_rule(int degree) {
  const int n = std::max(1, (degree + 2) / 2 + 1);
  const auto g = gauss_legendre<Scalar>(n);
  TriangleRule<Scalar> rule;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Scalar xi = g.nodes[i];
      const Scalar eta = g.nodes[j];
      rule.nodes.emplace_back(xi * (Scalar(1) - eta), eta);
      rule.weights.push_back(g.weights[i] * g.weights[j] * (Scalar(1) - eta));
    }
  }
  return rule;
}

}  // namespace hdgbem
