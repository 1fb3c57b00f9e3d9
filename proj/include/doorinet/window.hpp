// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "doorinet/attitude.hpp"

namespace doorinet {

/// Fixed-length run of consecutive IMU readings with the heading change over
/// it. Rates in rad/s, forces in m/s^2, target in degrees.
struct WindowSample {
  std::vector<AngularRate> gyro;
  std::vector<SpecificForce> accel;
  double target_deg = 0.0;
  std::string experiment;
  double t_first = 0.0;
  double t_last = 0.0;

  std::size_t size() const { return gyro.size(); }
};

}  // namespace doorinet
