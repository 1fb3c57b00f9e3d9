// SPDX-License-Identifier: Apache-2.0
#include "doorinet/madgwick.hpp"

#include <cmath>

#include "doorinet/error.hpp"

namespace doorinet::madgwick {

void Config::validate() const {
  if (!(k_norm >= 0.0)) throw InvalidArgument("madgwick.k_norm must be >= 0");
  if (!(k_init >= k_norm)) throw InvalidArgument("madgwick.k_init must be >= k_norm");
  if (!(t_init > 0.0)) throw InvalidArgument("madgwick.t_init must be > 0");
  if (!(sample_period > 0.0)) throw InvalidArgument("madgwick.sample_period must be > 0");
  if (stationary_threshold && !(*stationary_threshold >= 0.0)) {
    throw InvalidArgument("madgwick.stationary_threshold must be >= 0");
  }
}

double gain_at(const Config& config, double t) {
  if (t < config.t_init) {
    return config.k_norm + (config.t_init - t) / config.t_init * (config.k_init - config.k_norm);
  }
  return config.k_norm;
}

Vec3 reference_vector(const Quaternion& q, GravityReference reference) {
  if (reference == GravityReference::y_column) {
    return {2.0 * q.x * q.y - 2.0 * q.w * q.z, 2.0 * q.w * q.w - 1.0 + 2.0 * q.y * q.y,
            2.0 * q.y * q.z - 2.0 * q.w * q.x};
  }
  return {2.0 * q.x * q.z - 2.0 * q.w * q.y, 2.0 * q.y * q.z + 2.0 * q.w * q.x,
          2.0 * q.w * q.w - 1.0 + 2.0 * q.z * q.z};
}

Vec3 accel_error(const Quaternion& q, const SpecificForce& f, GravityReference reference) {
  const double n = f.norm();
  if (!(n > 0.0)) return {};
  return cross((1.0 / n) * f.vec(), reference_vector(q, reference));
}

namespace {

// Gain of zero skips the error term, so K = 0 is exact gyro propagation even
// when the error is non-finite.
Vec3 corrected_rate(const State& state, const Config& config, const AngularRate& w,
                    const SpecificForce& f) {
  const double k = gain_at(config, state.t);
  if (k == 0.0) return w.vec();
  return w.vec() + k * accel_error(state.q, f, config.reference);
}

}  // namespace

State step(const State& state, const Config& config, const AngularRate& w,
           const SpecificForce& f) {
  const Vec3 rate = corrected_rate(state, config, w, f);
  const Quaternion q_dot = state.q * Quaternion{0.0, 0.5 * rate.x, 0.5 * rate.y, 0.5 * rate.z};
  const double dt = config.sample_period;
  State next = state;
  next.q = normalize(Quaternion{state.q.w + q_dot.w * dt, state.q.x + q_dot.x * dt,
                                state.q.y + q_dot.y * dt, state.q.z + q_dot.z * dt});
  next.t = state.t + dt;
  return next;
}

namespace {

// The first point is the identity orientation at t_0. Each later step is
// driven by the mean of the two bracketing gyro samples, the same quadrature
// integrate_gyro uses, so K = 0 reduces to plain gyro integration.
template <class Report>
HeadingSeries run_impl(std::span<const ImuSample> samples, const Config& config, Report report) {
  config.validate();
  if (samples.size() < 2) throw InvalidArgument("madgwick::run: need at least 2 samples");
  HeadingSeries out;
  out.t.reserve(samples.size());
  out.heading_deg.reserve(samples.size());
  State state;
  out.push_back(samples[0].t, report(samples[0], heading_deg(state.q), state));
  state.last_heading_deg = out.heading_deg.back();
  double unwrap_offset = 0.0;
  double prev_wrapped = heading_deg(state.q);
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const ImuSample& s = samples[i];
    const AngularRate& w0 = samples[i - 1].w;
    const AngularRate mid{0.5 * (w0.x + s.w.x), 0.5 * (w0.y + s.w.y), 0.5 * (w0.z + s.w.z)};
    state = step(state, config, mid, s.f);
    const double h = heading_deg(state.q);
    const double jump = h - prev_wrapped;
    if (jump > 180.0) unwrap_offset -= 360.0;
    if (jump < -180.0) unwrap_offset += 360.0;
    prev_wrapped = h;
    const double reported = report(s, h + unwrap_offset, state);
    state.last_heading_deg = reported;
    out.push_back(s.t, reported);
  }
  return out;
}

}  // namespace

HeadingSeries run(std::span<const ImuSample> samples, const Config& config) {
  return run_impl(samples, config,
                  [](const ImuSample&, double heading, const State&) { return heading; });
}

HeadingSeries run_thresholded(std::span<const ImuSample> samples, const Config& config) {
  if (!config.stationary_threshold) {
    throw InvalidArgument("madgwick::run_thresholded: stationary_threshold is not set");
  }
  const double threshold = *config.stationary_threshold;
  return run_impl(samples, config,
                  [threshold](const ImuSample& s, double heading, const State& state) {
                    return s.w.norm() < threshold ? state.last_heading_deg : heading;
                  });
}

}  // namespace doorinet::madgwick
