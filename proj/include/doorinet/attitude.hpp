// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace doorinet {

inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;
inline constexpr double kRadPerDeg = std::numbers::pi / 180.0;

constexpr double deg_to_rad(double deg) { return deg * kRadPerDeg; }
constexpr double rad_to_deg(double rad) { return rad * kDegPerRad; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
  friend constexpr bool operator==(Vec3, Vec3) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Gyroscope reading in rad/s. Files and the CLI use deg/s; convert with
/// from_deg_s / to_deg_s at the boundary.
struct AngularRate {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static constexpr AngularRate from_deg_s(double x, double y, double z) {
    return {deg_to_rad(x), deg_to_rad(y), deg_to_rad(z)};
  }
  constexpr Vec3 vec() const { return {x, y, z}; }
  double norm() const { return vec().norm(); }
  friend constexpr bool operator==(AngularRate, AngularRate) = default;
};

/// Accelerometer reading (specific force) in m/s^2.
struct SpecificForce {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 vec() const { return {x, y, z}; }
  double norm() const { return vec().norm(); }
  friend constexpr bool operator==(SpecificForce, SpecificForce) = default;
};

/// One timestamped IMU reading.
struct ImuSample {
  double t = 0.0;  // seconds
  SpecificForce f;
  AngularRate w;
};

/// Scalar-first quaternion. Orientation of the sensor frame relative to the
/// earth frame.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static constexpr Quaternion identity() { return {}; }
  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  constexpr Quaternion conjugate() const { return {w, -x, -y, -z}; }
  friend constexpr bool operator==(const Quaternion&, const Quaternion&) = default;
};

/// Hamilton product a ⊗ b.
constexpr Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

inline Quaternion multiply(const Quaternion& a, const Quaternion& b) { return a * b; }

/// Unit quaternion with the same direction. Throws InvalidArgument on a zero
/// or non-finite norm.
Quaternion normalize(const Quaternion& q);

/// Rotation by `angle_rad` about the given axis (axis need not be unit).
Quaternion from_axis_angle(Vec3 axis, double angle_rad);

/// Yaw of the ZYX (yaw-pitch-roll) decomposition, degrees in (-180, 180].
double heading_deg(const Quaternion& q);

/// Timestamped heading trajectory. Timestamps in seconds, headings in degrees.
struct HeadingSeries {
  std::vector<double> t;
  std::vector<double> heading_deg;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  void push_back(double time, double heading) {
    t.push_back(time);
    heading_deg.push_back(heading);
  }
  /// Throws unless lengths match and timestamps strictly increase.
  void validate() const;
  /// Linear interpolation at `time`; clamps outside the covered span.
  double at(double time) const;
};

/// Maps an angle to (-180, 180].
double wrap_deg(double deg);

/// Removes +-360 jumps between consecutive points.
HeadingSeries unwrap(const HeadingSeries& series);

/// Display view: every heading wrapped to (-180, 180].
HeadingSeries wrapped(const HeadingSeries& series);

enum class Axis { x, y, z };

double component(const AngularRate& w, Axis axis);

/// Heading by trapezoidal integration of one gyro axis, starting at psi0_deg.
/// Requires >= 2 samples with strictly increasing timestamps.
HeadingSeries integrate_gyro(std::span<const ImuSample> samples, double psi0_deg,
                             Axis axis = Axis::z);

}  // namespace doorinet
