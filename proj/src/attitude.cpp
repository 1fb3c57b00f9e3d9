// SPDX-License-Identifier: Apache-2.0
#include "doorinet/attitude.hpp"

#include <algorithm>
#include <sstream>

#include "doorinet/error.hpp"

namespace doorinet {

Quaternion normalize(const Quaternion& q) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw InvalidArgument("normalize: quaternion has zero or non-finite norm");
  }
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Quaternion from_axis_angle(Vec3 axis, double angle_rad) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw InvalidArgument("from_axis_angle: zero axis");
  const double s = std::sin(0.5 * angle_rad) / n;
  return {std::cos(0.5 * angle_rad), s * axis.x, s * axis.y, s * axis.z};
}

double heading_deg(const Quaternion& q) {
  // atan2 form stays defined at gimbal lock.
  const double siny = 2.0 * (q.w * q.z + q.x * q.y);
  const double cosy = 1.0 - 2.0 * (q.y * q.y + q.z * q.z);
  return wrap_deg(rad_to_deg(std::atan2(siny, cosy)));
}

double wrap_deg(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r <= -180.0) r += 360.0;
  if (r > 180.0) r -= 360.0;
  return r;
}

void HeadingSeries::validate() const {
  if (t.size() != heading_deg.size()) {
    throw InvalidArgument("HeadingSeries: timestamp and heading lengths differ");
  }
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) {
      std::ostringstream msg;
      msg << "HeadingSeries: timestamps not strictly increasing at index " << i;
      throw InvalidArgument(msg.str());
    }
  }
}

double HeadingSeries::at(double time) const {
  if (t.empty()) throw InvalidArgument("HeadingSeries::at on empty series");
  if (time <= t.front()) return heading_deg.front();
  if (time >= t.back()) return heading_deg.back();
  const auto it = std::upper_bound(t.begin(), t.end(), time);
  const std::size_t hi = static_cast<std::size_t>(it - t.begin());
  const std::size_t lo = hi - 1;
  const double a = (time - t[lo]) / (t[hi] - t[lo]);
  return heading_deg[lo] + a * (heading_deg[hi] - heading_deg[lo]);
}

HeadingSeries unwrap(const HeadingSeries& series) {
  HeadingSeries out = series;
  double offset = 0.0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double step = series.heading_deg[i] - series.heading_deg[i - 1];
    if (step > 180.0) offset -= 360.0;
    if (step < -180.0) offset += 360.0;
    out.heading_deg[i] = series.heading_deg[i] + offset;
  }
  return out;
}

HeadingSeries wrapped(const HeadingSeries& series) {
  HeadingSeries out = series;
  for (double& h : out.heading_deg) h = wrap_deg(h);
  return out;
}

double component(const AngularRate& w, Axis axis) {
  switch (axis) {
    case Axis::x: return w.x;
    case Axis::y: return w.y;
    case Axis::z: return w.z;
  }
  return w.z;
}

HeadingSeries integrate_gyro(std::span<const ImuSample> samples, double psi0_deg, Axis axis) {
  if (samples.size() < 2) throw InvalidArgument("integrate_gyro: need at least 2 samples");
  HeadingSeries out;
  out.t.reserve(samples.size());
  out.heading_deg.reserve(samples.size());
  double psi = deg_to_rad(psi0_deg);
  out.push_back(samples[0].t, psi0_deg);
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double dt = samples[i].t - samples[i - 1].t;
    if (!(dt > 0.0)) {
      std::ostringstream msg;
      msg << "integrate_gyro: timestamps not strictly increasing at index " << i;
      throw InvalidArgument(msg.str());
    }
    psi += 0.5 * dt * (component(samples[i - 1].w, axis) + component(samples[i].w, axis));
    out.push_back(samples[i].t, rad_to_deg(psi));
  }
  return out;
}

}  // namespace doorinet
