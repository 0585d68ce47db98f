#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace tailsim {

using Vec2 = Eigen::Vector2d;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Counter-clockwise quarter turn.
inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

inline Vec2 unit_from_angle(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace tailsim
