#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "tailsim/geometry.hpp"

namespace tailsim {

enum class ShapeKind { Circle, RegularPolygon };

std::string_view to_string(ShapeKind kind);
std::optional<ShapeKind> shape_kind_from_string(std::string_view text);

struct Pose2 {
  Vec2 position = Vec2::Zero();
  double rotation = 0.0;  // rad

  friend bool operator==(const Pose2&, const Pose2&) = default;
};

// Circle or regular polygon. For polygons `diameter` is the circumscribed
// circle; vertex 0 sits at angle `pose.rotation` from the centre.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::Circle;
  double diameter = 0.0;  // m
  int side_count = 0;
  Pose2 pose;

  double radius() const { return 0.5 * diameter; }
  double side_length() const;
  std::vector<Vec2> vertices() const;

  friend bool operator==(const ShapeSpec&, const ShapeSpec&) = default;
};

ShapeSpec make_circle(double diameter, Vec2 center);
ShapeSpec make_polygon(int sides, double circumdiameter, Vec2 center, double rotation = 0.0);

// Static wall: a segment with finite thickness (capsule).
struct Segment {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
  double thickness = 0.01;  // m

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct SignedDistance {
  double distance = 0.0;  // negative inside
  Vec2 normal = Vec2::UnitX();  // outward unit normal at the nearest boundary point
};

SignedDistance signed_distance(const ShapeSpec& shape, const Vec2& point);
SignedDistance signed_distance(const Segment& wall, const Vec2& point);

}  // namespace tailsim
