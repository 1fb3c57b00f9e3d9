// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>

#include "doorinet/attitude.hpp"

namespace doorinet::madgwick {

/// Which reference direction the accelerometer error term compares against.
enum class GravityReference {
  /// Third column of the rotation matrix: gravity along the earth z axis.
  /// (2qxqz - 2qwqy, 2qyqz + 2qwqx, 2qw^2 - 1 + 2qz^2). (0,0,1) at identity.
  standard,
  /// Second-column form (2qxqy - 2qwqz, 2qw^2 - 1 + 2qy^2, 2qyqz - 2qwqx),
  /// i.e. gravity along earth +y. (0,1,0) at identity.
  y_column,
};

struct Config {
  double k_init = 10.0;
  double k_norm = 0.5;
  double t_init = 3.0;                          // s
  double sample_period = 1.0 / 120.0;           // s
  std::optional<double> stationary_threshold = 0.05;  // rad/s, run_thresholded only
  GravityReference reference = GravityReference::standard;

  /// Throws InvalidArgument naming the first bad field.
  void validate() const;
};

struct State {
  Quaternion q;
  double t = 0.0;
  double last_heading_deg = 0.0;
};

/// Gain ramp: K_init at t = 0 falling linearly to K_norm at t_init, then flat.
double gain_at(const Config& config, double t);

/// Reference direction v(q) used by the error term.
Vec3 reference_vector(const Quaternion& q, GravityReference reference);

/// e = f_hat x v(q) when |f| > 0, the zero vector otherwise.
Vec3 accel_error(const Quaternion& q, const SpecificForce& f,
                 GravityReference reference = GravityReference::standard);

/// One rectangular integration step of q_dot = 1/2 q ⊗ [0, w + K e].
State step(const State& state, const Config& config, const AngularRate& w,
           const SpecificForce& f);

/// Heading series from the identity orientation, one point per sample,
/// unwrapped.
HeadingSeries run(std::span<const ImuSample> samples, const Config& config);

/// As run, but while |w| < stationary_threshold the reported heading holds
/// its previous value. The internal quaternion keeps propagating.
HeadingSeries run_thresholded(std::span<const ImuSample> samples, const Config& config);

}  // namespace doorinet::madgwick
