#include "tailsim/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tailsim/errors.hpp"

namespace tailsim {

std::string_view to_string(ShapeKind kind) {
  return kind == ShapeKind::Circle ? "circle" : "polygon";
}

std::optional<ShapeKind> shape_kind_from_string(std::string_view text) {
  if (text == "circle") return ShapeKind::Circle;
  if (text == "polygon") return ShapeKind::RegularPolygon;
  return std::nullopt;
}

double ShapeSpec::side_length() const {
  if (kind == ShapeKind::Circle) return 0.0;
  return diameter * std::sin(std::numbers::pi / side_count);
}

std::vector<Vec2> ShapeSpec::vertices() const {
  std::vector<Vec2> out;
  if (kind == ShapeKind::Circle) return out;
  out.reserve(side_count);
  for (int k = 0; k < side_count; ++k) {
    const double angle = pose.rotation + 2.0 * std::numbers::pi * k / side_count;
    out.push_back(pose.position + radius() * unit_from_angle(angle));
  }
  return out;
}

ShapeSpec make_circle(double diameter, Vec2 center) {
  if (!(diameter > 0.0)) throw InvalidArgument("circle diameter must be positive");
  return ShapeSpec{ShapeKind::Circle, diameter, 0, {center, 0.0}};
}

ShapeSpec make_polygon(int sides, double circumdiameter, Vec2 center, double rotation) {
  if (sides < 3) throw InvalidArgument("polygon needs at least 3 sides");
  if (!(circumdiameter > 0.0)) throw InvalidArgument("polygon diameter must be positive");
  return ShapeSpec{ShapeKind::RegularPolygon, circumdiameter, sides, {center, rotation}};
}

namespace {

SignedDistance circle_distance(const Vec2& center, double radius, const Vec2& p) {
  const Vec2 d = p - center;
  const double r = d.norm();
  if (r == 0.0) return {-radius, Vec2::UnitX()};
  return {r - radius, d / r};
}

SignedDistance polygon_distance(const ShapeSpec& shape, const Vec2& p) {
  const auto verts = shape.vertices();
  const int n = static_cast<int>(verts.size());
  // Counter-clockwise vertices: the outward normal of edge (a, b) is -perp(b - a).
  bool inside = true;
  double best_inside = -std::numeric_limits<double>::infinity();
  Vec2 best_inside_normal = Vec2::UnitX();
  double best_outside = std::numeric_limits<double>::infinity();
  Vec2 best_outside_normal = Vec2::UnitX();
  for (int k = 0; k < n; ++k) {
    const Vec2& a = verts[k];
    const Vec2& b = verts[(k + 1) % n];
    const Vec2 edge = b - a;
    const double len = edge.norm();
    const Vec2 outward = -perp(edge) / len;
    const double plane = outward.dot(p - a);
    if (plane > 0.0) inside = false;
    if (plane > best_inside) {
      best_inside = plane;
      best_inside_normal = outward;
    }
    const double t = std::clamp((p - a).dot(edge) / (len * len), 0.0, 1.0);
    const Vec2 closest = a + t * edge;
    const Vec2 diff = p - closest;
    const double dist = diff.norm();
    if (dist < best_outside) {
      best_outside = dist;
      best_outside_normal = dist > 0.0 ? Vec2(diff / dist) : outward;
    }
  }
  if (inside) return {best_inside, best_inside_normal};
  return {best_outside, best_outside_normal};
}

}  // namespace

SignedDistance signed_distance(const ShapeSpec& shape, const Vec2& point) {
  if (shape.kind == ShapeKind::Circle) {
    return circle_distance(shape.pose.position, shape.radius(), point);
  }
  return polygon_distance(shape, point);
}

SignedDistance signed_distance(const Segment& wall, const Vec2& point) {
  const Vec2 edge = wall.b - wall.a;
  const double len2 = edge.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((point - wall.a).dot(edge) / len2, 0.0, 1.0) : 0.0;
  const Vec2 closest = wall.a + t * edge;
  const Vec2 diff = point - closest;
  const double dist = diff.norm();
  const double half = 0.5 * wall.thickness;
  if (dist == 0.0) {
    const Vec2 n = len2 > 0.0 ? Vec2(perp(edge).normalized()) : Vec2(Vec2::UnitY());
    return {-half, n};
  }
  return {dist - half, diff / dist};
}

}  // namespace tailsim
