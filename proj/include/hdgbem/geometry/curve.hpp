#pragma once

#include <functional>
#include <vector>

#include "hdgbem/types.hpp"

namespace hdgbem::geometry {

/// Closed, counterclockwise curve parametrised over [0, 2pi).
///
/// Circles and smooth parametrised curves are what the solvers work with.
/// Polygons exist so that fitted polygonal meshes can be described; their
/// parameter is proportional to arclength and they are rejected by the BEM.
class Curve {
 public:
  enum class Kind { circle, parametrized, polygon };
  using PointMap = std::function<Point(double)>;

  static Curve circle(const Point& center, double radius);
  static Curve parametrized(PointMap position, PointMap derivative, PointMap second_derivative);
  static Curve ellipse(const Point& center, double semi_x, double semi_y);
  static Curve polygon(std::vector<Point> vertices);

  Kind kind() const { return kind_; }
  bool is_circle() const { return kind_ == Kind::circle; }
  bool is_smooth() const { return kind_ != Kind::polygon; }
  const Point& center() const { return center_; }
  double radius() const { return radius_; }

  Point position(double s) const;
  Point derivative(double s) const;
  Point second_derivative(double s) const;
  double speed(double s) const { return derivative(s).norm(); }
  /// Unit normal pointing away from the region the curve encloses.
  Point outward_normal(double s) const;

  double length() const { return length_; }
  double enclosed_area() const;
  double diameter() const;

  struct Projection {
    double s = 0.0;
    Point point = Point::Zero();
    double distance = 0.0;
  };
  Projection closest_point(const Point& x) const;
  double distance(const Point& x) const { return closest_point(x).distance; }
  /// True when x lies in the open region enclosed by the curve.
  bool contains(const Point& x) const;

  /// Parameters whose images are equispaced in arclength.
  std::vector<double> arclength_parameters(int count) const;

 private:
  Curve() = default;
  void finalize();

  Kind kind_ = Kind::circle;
  Point center_ = Point::Zero();
  double radius_ = 0.0;
  PointMap position_, derivative_, second_derivative_;
  std::vector<Point> vertices_;
  std::vector<double> cumulative_;  // polygon arclength at each vertex
  double length_ = 0.0;
  std::vector<double> samples_s_;
  std::vector<Point> samples_;
};

}  // namespace hdgbem::geometry
