#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>

namespace clothbench {

constexpr double kGravity = 9.81;  // m/s^2, acts along -z
constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator-() const { return {-x, -y}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::sqrt(x * x + y * y); }
  Vec2 normalized() const {
    double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{};
  }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double norm2() const { return x * x + y * y + z * z; }
  Vec3 normalized() const {
    double n = norm();
    return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{};
  }
  Vec2 xy() const { return {x, y}; }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline Vec3 lerp(const Vec3& a, const Vec3& b, double t) { return a + (b - a) * t; }
inline double lerp(double a, double b, double t) { return a + (b - a) * t; }

// Tool pose: position plus roll/pitch/yaw (XYZ intrinsic, radians).
// Every motion this library plans uses yaw only, but the full set is kept
// so trajectories stay 6-DOF on the wire.
struct Pose {
  Vec3 pos;
  double roll = 0.0, pitch = 0.0, yaw = 0.0;

  // Rotation matrix columns for R = Rz(yaw)*Ry(pitch)*Rx(roll).
  std::array<Vec3, 3> rotation() const {
    double cr = std::cos(roll), sr = std::sin(roll);
    double cp = std::cos(pitch), sp = std::sin(pitch);
    double cy = std::cos(yaw), sy = std::sin(yaw);
    Vec3 ex{cy * cp, sy * cp, -sp};
    Vec3 ey{cy * sp * sr - sy * cr, sy * sp * sr + cy * cr, cp * sr};
    Vec3 ez{cy * sp * cr + sy * sr, sy * sp * cr - cy * sr, cp * cr};
    return {ex, ey, ez};
  }

  Vec3 to_world(const Vec3& local) const {
    auto r = rotation();
    return pos + r[0] * local.x + r[1] * local.y + r[2] * local.z;
  }

  Vec3 to_local(const Vec3& world) const {
    auto r = rotation();
    Vec3 d = world - pos;
    return {d.dot(r[0]), d.dot(r[1]), d.dot(r[2])};
  }

  bool operator==(const Pose& o) const {
    return pos == o.pos && roll == o.roll && pitch == o.pitch && yaw == o.yaw;
  }
};

// Oriented 2D line: points with dot(p - point, normal) > 0 are on the
// "positive" side. Fold lines point their normal at the moving half.
struct Line2 {
  Vec2 point;
  Vec2 normal;  // unit

  double signed_distance(const Vec2& p) const { return (p - point).dot(normal); }

  Vec2 reflect(const Vec2& p) const {
    double d = signed_distance(p);
    return p - normal * (2.0 * d);
  }
};

inline double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Canonical float formatting used by every serializer so that identical
// runs produce identical bytes.
inline std::string fmt_double(double v, int precision = 9) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

// Lossless round-trip formatting (trajectory files, replay).
inline std::string fmt_exact(double v) { return fmt_double(v, 17); }

}  // namespace clothbench
