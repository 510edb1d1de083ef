#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "homog/error.hpp"

namespace homog {

/// A point of R^d for d in {1, 2}; in one dimension the second coordinate is zero.
using Point = std::array<double, 2>;

inline double norm(const Point& z) { return std::hypot(z[0], z[1]); }
inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point operator-(const Point& a) { return {-a[0], -a[1]}; }
inline Point operator*(double s, const Point& a) { return {s * a[0], s * a[1]}; }

/// Direction angle in [0, 2 pi). In one dimension +1 maps to 0 and -1 to pi.
inline double direction_angle(const Point& z) {
  const double t = std::atan2(z[1], z[0]);
  return t < 0.0 ? t + 2.0 * std::numbers::pi : t;
}

inline Point unit_vector(double theta) { return {std::cos(theta), std::sin(theta)}; }

inline void check_dimension(int d) {
  if (d != 1 && d != 2) throw InvalidArgument("dimension must be 1 or 2, got " + std::to_string(d));
}

}  // namespace homog
