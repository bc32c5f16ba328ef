#include "hdgbem/hdg/basis.hpp"

#include <cmath>

#include "hdgbem/errors.hpp"
#include "hdgbem/quadrature.hpp"

namespace hdgbem::hdg {

ElementBasis::ElementBasis(const std::array<Point, 3>& vertices, int k) : k_(k), vertices_(vertices) {
  if (k < 0) throw AssemblyError("polynomial degree must be nonnegative");
  centroid_ = (vertices[0] + vertices[1] + vertices[2]) / 3.0;
  area_ = 0.5 * cross2(vertices[1] - vertices[0], vertices[2] - vertices[0]);
  if (!(std::abs(area_) > 0.0)) throw AssemblyError("singular element Jacobian");
  area_ = std::abs(area_);
  scale_ = std::max({(vertices[1] - vertices[0]).norm(), (vertices[2] - vertices[1]).norm(),
                     (vertices[0] - vertices[2]).norm()});
  const int n = size();
  coeff_ = MatrixX::Identity(n, n);
  const auto rule = triangle_rule<double>(2 * k);
  MatrixX gram = MatrixX::Zero(n, n);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const VectorX m = monomials(map(rule.nodes[q]));
    gram.noalias() += (2.0 * rule.weights[q]) * m * m.transpose();
  }
  Eigen::LLT<MatrixX> llt(gram);
  if (llt.info() != Eigen::Success) throw AssemblyError("element basis Gram matrix is not positive definite");
  coeff_ = llt.matrixL().solve(MatrixX::Identity(n, n));
}

VectorX ElementBasis::monomials(const Point& x) const {
  const double dx = (x.x() - centroid_.x()) / scale_;
  const double dy = (x.y() - centroid_.y()) / scale_;
  VectorX m(size());
  int i = 0;
  for (int d = 0; d <= k_; ++d)
    for (int j = 0; j <= d; ++j) m[i++] = std::pow(dx, d - j) * std::pow(dy, j);
  return m;
}

Eigen::Matrix<double, Eigen::Dynamic, 2> ElementBasis::monomial_gradients(const Point& x) const {
  const double dx = (x.x() - centroid_.x()) / scale_;
  const double dy = (x.y() - centroid_.y()) / scale_;
  Eigen::Matrix<double, Eigen::Dynamic, 2> g(size(), 2);
  int i = 0;
  for (int d = 0; d <= k_; ++d) {
    for (int j = 0; j <= d; ++j) {
      const int a = d - j;
      g(i, 0) = a > 0 ? a * std::pow(dx, a - 1) * std::pow(dy, j) / scale_ : 0.0;
      g(i, 1) = j > 0 ? j * std::pow(dx, a) * std::pow(dy, j - 1) / scale_ : 0.0;
      ++i;
    }
  }
  return g;
}

VectorX ElementBasis::values(const Point& x) const { return coeff_ * monomials(x); }

Eigen::Matrix<double, Eigen::Dynamic, 2> ElementBasis::gradients(const Point& x) const {
  return coeff_ * monomial_gradients(x);
}

VectorX edge_basis(int k, double xi) {
  VectorX v(k + 1);
  const double x = 2.0 * xi - 1.0;
  double p0 = 1.0, p1 = x;
  for (int m = 0; m <= k; ++m) {
    double p;
    if (m == 0) {
      p = 1.0;
    } else if (m == 1) {
      p = x;
    } else {
      p = ((2 * m - 1) * x * p1 - (m - 1) * p0) / m;
      p0 = p1;
      p1 = p;
    }
    v[m] = std::sqrt(2.0 * m + 1.0) * p;
  }
  return v;
}

}  // namespace hdgbem::hdg
