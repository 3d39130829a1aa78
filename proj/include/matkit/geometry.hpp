#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace matkit {

// Thrown when an input violates an operation's contract. The CLI maps this
// to exit code 1.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on file system / codec failures. The CLI maps this to exit code 2.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::sqrt(dot(v, v)); }

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec3 normalize() const {
    const double n = norm();
    if (n == 0.0) throw ValidationError("cannot normalize zero-length vector");
    return {x / n, y / n, z / n};
  }
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
inline Vec3 operator*(Vec3 v, double s) { return {s * v.x, s * v.y, s * v.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalize(Vec3 v) {
  double n = norm(v);
  if (n == 0.0) throw ValidationError("cannot normalize zero-length vector");
  return (1.0 / n) * v;
}

// Pinhole camera intrinsics in pixel units.
struct Intrinsics {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
};

// Position plus look-at target. The viewing vector is target - position.
struct CameraPose {
  Vec3 position;
  Vec3 target;
  Vec3 up_hint{0.0, 0.0, 1.0};
};

// Orthonormal camera frame. Image u grows along axis_x, v along axis_y,
// depth along forward; a world point p projects to
//   u = cx + fx * dot(p - origin, axis_x) / dot(p - origin, forward).
struct CameraFrame {
  Vec3 origin;
  Vec3 axis_x, axis_y, forward;
};

inline CameraFrame make_camera_frame(const CameraPose& pose) {
  if (norm(pose.target - pose.position) == 0.0)
    throw ValidationError("camera position coincides with look-at target");
  Vec3 fwd = normalize(pose.target - pose.position);
  Vec3 up = pose.up_hint;
  Vec3 right = cross(fwd, up);
  if (norm(right) < 1e-9) {
    up = Vec3{0.0, 1.0, 0.0};
    right = cross(fwd, up);
    if (norm(right) < 1e-9) {
      up = Vec3{1.0, 0.0, 0.0};
      right = cross(fwd, up);
    }
  }
  Vec3 x = normalize(right);
  Vec3 y = cross(x, fwd);
  return CameraFrame{pose.position, x, y, fwd};
}

struct CameraSpacePoint {
  double x, y, z;
};

inline CameraSpacePoint to_camera(const CameraFrame& f, Vec3 p) {
  Vec3 q = p - f.origin;
  return {dot(q, f.axis_x), dot(q, f.axis_y), dot(q, f.forward)};
}

inline Vec2 project_pinhole(const Intrinsics& K, const CameraSpacePoint& c) {
  return {K.cx + K.fx * c.x / c.z, K.cy + K.fy * c.y / c.z};
}

}  // namespace matkit
