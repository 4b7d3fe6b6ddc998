#pragma once

#include <algorithm>
#include <cmath>

namespace texpipe {

struct vec2 {
  double x = 0, y = 0;
};

struct vec3 {
  double x = 0, y = 0, z = 0;

  double operator[](int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
  double& operator[](int axis) { return axis == 0 ? x : axis == 1 ? y : z; }
};

struct vec3i {
  int x = 0, y = 0, z = 0;
};

inline bool operator==(const vec2& a, const vec2& b) { return a.x == b.x && a.y == b.y; }
inline vec2 operator+(const vec2& a, const vec2& b) { return {a.x + b.x, a.y + b.y}; }
inline vec2 operator-(const vec2& a, const vec2& b) { return {a.x - b.x, a.y - b.y}; }
inline vec2 operator*(const vec2& a, double s) { return {a.x * s, a.y * s}; }
inline vec2 operator*(double s, const vec2& a) { return a * s; }
inline vec2 operator/(const vec2& a, double s) { return {a.x / s, a.y / s}; }
inline double dot(const vec2& a, const vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const vec2& a, const vec2& b) { return a.x * b.y - a.y * b.x; }
inline double length(const vec2& a) { return std::sqrt(dot(a, a)); }

inline bool operator==(const vec3& a, const vec3& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
inline vec3 operator-(const vec3& a) { return {-a.x, -a.y, -a.z}; }
inline vec3 operator+(const vec3& a, const vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline vec3 operator-(const vec3& a, const vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline vec3 operator*(const vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
inline vec3 operator*(double s, const vec3& a) { return a * s; }
inline vec3 operator*(const vec3& a, const vec3& b) { return {a.x * b.x, a.y * b.y, a.z * b.z}; }
inline vec3 operator/(const vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }
inline vec3& operator+=(vec3& a, const vec3& b) { a = a + b; return a; }
inline vec3& operator-=(vec3& a, const vec3& b) { a = a - b; return a; }
inline vec3& operator*=(vec3& a, double s) { a = a * s; return a; }
inline vec3& operator/=(vec3& a, double s) { a = a / s; return a; }

inline double dot(const vec3& a, const vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline vec3 cross(const vec3& a, const vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length_squared(const vec3& a) { return dot(a, a); }
inline double length(const vec3& a) { return std::sqrt(dot(a, a)); }
inline vec3 normalize(const vec3& a) {
  double len = length(a);
  return len > 0 ? a / len : a;
}
inline double distance(const vec3& a, const vec3& b) { return length(a - b); }
inline double distance_squared(const vec3& a, const vec3& b) { return length_squared(a - b); }

inline vec3 min(const vec3& a, const vec3& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline vec3 max(const vec3& a, const vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}
inline double max_component(const vec3& a) { return std::max(a.x, std::max(a.y, a.z)); }
inline double min_component(const vec3& a) { return std::min(a.x, std::min(a.y, a.z)); }

inline double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }
inline vec3 clamp(const vec3& v, double lo, double hi) {
  return {clamp(v.x, lo, hi), clamp(v.y, lo, hi), clamp(v.z, lo, hi)};
}
inline vec3 lerp(const vec3& a, const vec3& b, double t) { return a * (1 - t) + b * t; }

inline bool operator==(const vec3i& a, const vec3i& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }

constexpr double pi = 3.14159265358979323846;
inline double radians(double deg) { return deg * (pi / 180.0); }

}  // namespace texpipe
