#pragma once

#include <array>

#include "hdgbem/types.hpp"

namespace hdgbem::hdg {

inline int dim_p(int k) { return k < 0 ? 0 : (k + 1) * (k + 2) / 2; }

/// Modal basis of P_k on one triangle: scaled monomials around the centroid,
/// orthonormalised in degree order so that (phi_i, phi_j)_T = |T| delta_ij
/// and the first dim_p(m) functions span P_m.
class ElementBasis {
 public:
  ElementBasis() = default;
  ElementBasis(const std::array<Point, 3>& vertices, int k);

  int degree() const { return k_; }
  int size() const { return dim_p(k_); }
  const Point& centroid() const { return centroid_; }
  double area() const { return area_; }
  const std::array<Point, 3>& vertices() const { return vertices_; }

  VectorX values(const Point& x) const;
  /// Row i holds the gradient of basis function i.
  Eigen::Matrix<double, Eigen::Dynamic, 2> gradients(const Point& x) const;
  /// Maps reference coordinates of {(0,0),(1,0),(0,1)} to the element.
  Point map(const Point& ref) const {
    return vertices_[0] + ref.x() * (vertices_[1] - vertices_[0]) + ref.y() * (vertices_[2] - vertices_[0]);
  }

 private:
  VectorX monomials(const Point& x) const;
  Eigen::Matrix<double, Eigen::Dynamic, 2> monomial_gradients(const Point& x) const;

  int k_ = 0;
  std::array<Point, 3> vertices_{};
  Point centroid_ = Point::Zero();
  double scale_ = 1.0;
  double area_ = 0.0;
  MatrixX coeff_;  // lower triangular, phi = coeff_ * monomials
};

/// Legendre basis on an edge parametrised by xi in [0, 1], normalised so that
/// the edge mass matrix is |e| times the identity.
VectorX edge_basis(int k, double xi);

}  // namespace hdgbem::hdg
