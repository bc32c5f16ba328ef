#pragma once

#include <Eigen/Dense>

namespace hdgbem {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

using Point = Point2<double>;
using Matrix2 = Eigen::Matrix2d;
using MatrixX = Eigen::MatrixXd;
using VectorX = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Wraps an angle difference into (-pi, pi].
inline double wrap_angle(double d) {
  while (d <= -kPi) d += kTwoPi;
  while (d > kPi) d -= kTwoPi;
  return d;
}

// Maps a parameter into [0, 2pi).
inline double wrap_parameter(double s) {
  s = std::fmod(s, kTwoPi);
  if (s < 0.0) s += kTwoPi;
  if (s >= kTwoPi) s = 0.0;
  return s;
}

inline double cross2(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace hdgbem
