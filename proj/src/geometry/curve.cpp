#include "hdgbem/geometry/curve.hpp"

#include <algorithm>
#include <limits>
#include <cmath>

#include "hdgbem/errors.hpp"

namespace hdgbem::geometry {

namespace {
constexpr int kSampleCount = 512;
}

Curve Curve::circle(const Point& center, double radius) {
  if (!(radius > 0.0)) throw GeometryInfeasibleError("circle radius must be positive");
  Curve c;
  c.kind_ = Kind::circle;
  c.center_ = center;
  c.radius_ = radius;
  c.finalize();
  return c;
}

Curve Curve::parametrized(PointMap position, PointMap derivative, PointMap second_derivative) {
  Curve c;
  c.kind_ = Kind::parametrized;
  c.position_ = std::move(position);
  c.derivative_ = std::move(derivative);
  c.second_derivative_ = std::move(second_derivative);
  c.finalize();
  return c;
}

Curve Curve::ellipse(const Point& center, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw GeometryInfeasibleError("ellipse semi-axes must be positive");
  Curve c = parametrized([=](double s) { return Point(center.x() + a * std::cos(s), center.y() + b * std::sin(s)); },
                         [=](double s) { return Point(-a * std::sin(s), b * std::cos(s)); },
                         [=](double s) { return Point(-a * std::cos(s), -b * std::sin(s)); });
  c.center_ = center;
  return c;
}

Curve Curve::polygon(std::vector<Point> vertices) {
  if (vertices.size() < 3) throw GeometryInfeasibleError("polygon needs at least three vertices");
  Curve c;
  c.kind_ = Kind::polygon;
  c.vertices_ = std::move(vertices);
  double signed_area = 0.0;
  const std::size_t m = c.vertices_.size();
  for (std::size_t i = 0; i < m; ++i) signed_area += cross2(c.vertices_[i], c.vertices_[(i + 1) % m]);
  if (signed_area < 0.0) std::reverse(c.vertices_.begin(), c.vertices_.end());
  c.cumulative_.assign(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    c.cumulative_[i + 1] = c.cumulative_[i] + (c.vertices_[(i + 1) % m] - c.vertices_[i]).norm();
  Point sum = Point::Zero();
  for (const auto& v : c.vertices_) sum += v;
  c.center_ = sum / double(m);
  c.finalize();
  return c;
}

void Curve::finalize() {
  if (kind_ == Kind::circle) {
    length_ = kTwoPi * radius_;
  } else if (kind_ == Kind::polygon) {
    length_ = cumulative_.back();
  } else {
    // Trapezoid rule is spectrally accurate for periodic integrands.
    const int m = 2048;
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      const double sp = derivative_(kTwoPi * i / m).norm();
      if (!(sp > 0.0)) throw GeometryInfeasibleError("curve parametrisation has vanishing speed");
      sum += sp;
    }
    length_ = sum * kTwoPi / m;
  }
  samples_s_.resize(kSampleCount);
  samples_.resize(kSampleCount);
  for (int i = 0; i < kSampleCount; ++i) {
    samples_s_[i] = kTwoPi * i / kSampleCount;
    samples_[i] = position(samples_s_[i]);
  }
}

Point Curve::position(double s) const {
  switch (kind_) {
    case Kind::circle:
      return center_ + radius_ * Point(std::cos(s), std::sin(s));
    case Kind::parametrized:
      return position_(s);
    case Kind::polygon: {
      const double a = wrap_parameter(s) / kTwoPi * length_;
      const std::size_t m = vertices_.size();
      std::size_t i = std::upper_bound(cumulative_.begin(), cumulative_.end(), a) - cumulative_.begin();
      i = std::clamp<std::size_t>(i, 1, m) - 1;
      const double len = cumulative_[i + 1] - cumulative_[i];
      const double u = len > 0.0 ? (a - cumulative_[i]) / len : 0.0;
      return vertices_[i] + u * (vertices_[(i + 1) % m] - vertices_[i]);
    }
  }
  return Point::Zero();
}

Point Curve::derivative(double s) const {
  switch (kind_) {
    case Kind::circle:
      return radius_ * Point(-std::sin(s), std::cos(s));
    case Kind::parametrized:
      return derivative_(s);
    case Kind::polygon: {
      const double a = wrap_parameter(s) / kTwoPi * length_;
      const std::size_t m = vertices_.size();
      std::size_t i = std::upper_bound(cumulative_.begin(), cumulative_.end(), a) - cumulative_.begin();
      i = std::clamp<std::size_t>(i, 1, m) - 1;
      const Point d = vertices_[(i + 1) % m] - vertices_[i];
      return d.normalized() * (length_ / kTwoPi);
    }
  }
  return Point::Zero();
}

Point Curve::second_derivative(double s) const {
  switch (kind_) {
    case Kind::circle:
      return -radius_ * Point(std::cos(s), std::sin(s));
    case Kind::parametrized:
      return second_derivative_(s);
    case Kind::polygon:
      return Point::Zero();
  }
  return Point::Zero();
}

Point Curve::outward_normal(double s) const {
  const Point d = derivative(s);
  return Point(d.y(), -d.x()) / d.norm();
}

double Curve::enclosed_area() const {
  if (kind_ == Kind::circle) return kPi * radius_ * radius_;
  if (kind_ == Kind::polygon) {
    double a = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i) a += cross2(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
    return 0.5 * a;
  }
  const int m = 2048;
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    const double s = kTwoPi * i / m;
    sum += cross2(position(s), derivative(s));
  }
  return 0.5 * sum * kTwoPi / m;
}

double Curve::diameter() const {
  if (kind_ == Kind::circle) return 2.0 * radius_;
  double d = 0.0;
  for (std::size_t i = 0; i < samples_.size(); i += 4)
    for (std::size_t j = i + 1; j < samples_.size(); j += 4) d = std::max(d, (samples_[i] - samples_[j]).norm());
  return d;
}

Curve::Projection Curve::closest_point(const Point& x) const {
  Projection p;
  if (kind_ == Kind::circle) {
    const Point r = x - center_;
    const double rn = r.norm();
    p.s = rn > 0.0 ? wrap_parameter(std::atan2(r.y(), r.x())) : 0.0;
    p.point = position(p.s);
    p.distance = std::abs(rn - radius_);
    return p;
  }
  if (kind_ == Kind::polygon) {
    p.distance = std::numeric_limits<double>::infinity();
    const std::size_t m = vertices_.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Point a = vertices_[i];
      const Point d = vertices_[(i + 1) % m] - a;
      const double u = std::clamp((x - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
      const Point q = a + u * d;
      const double dist = (x - q).norm();
      if (dist < p.distance) {
        p.distance = dist;
        p.point = q;
        p.s = wrap_parameter((cumulative_[i] + u * d.norm()) / length_ * kTwoPi);
      }
    }
    return p;
  }
  // Sample, then polish with Newton on (y(s) - x).y'(s) = 0.
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const double d = (samples_[i] - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  const double step_cap = kTwoPi / samples_.size();
  double s = samples_s_[best];
  for (int it = 0; it < 50; ++it) {
    const Point r = position(s) - x;
    const Point d1 = derivative(s);
    const double f = r.dot(d1);
    double fp = d1.squaredNorm() + r.dot(second_derivative(s));
    if (fp <= 0.0) fp = d1.squaredNorm();
    const double ds = std::clamp(-f / fp, -step_cap, step_cap);
    s += ds;
    if (std::abs(ds) < 1e-15) break;
  }
  p.s = wrap_parameter(s);
  p.point = position(p.s);
  p.distance = (p.point - x).norm();
  return p;
}

bool Curve::contains(const Point& x) const {
  if (kind_ == Kind::circle) return (x - center_).norm() < radius_;
  const Projection p = closest_point(x);
  if (p.distance == 0.0) return false;
  if (kind_ == Kind::polygon) {
    // Crossing-number test avoids ambiguity at polygon corners.
    bool inside = false;
    const std::size_t m = vertices_.size();
    for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
      const Point& a = vertices_[i];
      const Point& b = vertices_[j];
      if ((a.y() > x.y()) != (b.y() > x.y()) && x.x() < (b.x() - a.x()) * (x.y() - a.y()) / (b.y() - a.y()) + a.x())
        inside = !inside;
    }
    return inside;
  }
  return (x - p.point).dot(outward_normal(p.s)) < 0.0;
}

std::vector<double> Curve::arclength_parameters(int count) const {
  std::vector<double> out(count);
  if (kind_ != Kind::parametrized) {
    for (int i = 0; i < count; ++i) out[i] = kTwoPi * i / count;
    return out;
  }
  const int m = 4096;
  std::vector<double> acc(m + 1, 0.0);
  for (int i = 0; i < m; ++i) {
    const double s0 = kTwoPi * i / m, s1 = kTwoPi * (i + 1) / m;
    // Simpson on each cell.
    acc[i + 1] = acc[i] + (s1 - s0) / 6.0 * (speed(s0) + 4.0 * speed(0.5 * (s0 + s1)) + speed(s1));
  }
  const double total = acc[m];
  for (int j = 0; j < count; ++j) {
    const double target = total * j / count;
    std::size_t i = std::upper_bound(acc.begin(), acc.end(), target) - acc.begin();
    i = std::clamp<std::size_t>(i, 1, m) - 1;
    out[j] = kTwoPi * (i + (target - acc[i]) / (acc[i + 1] - acc[i])) / m;
  }
  return out;
}

}  // namespace hdgbem::geometry
