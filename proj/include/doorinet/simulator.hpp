// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "doorinet/dataset.hpp"
#include "doorinet/io.hpp"

namespace doorinet::sim {

inline constexpr double kGravity = 9.80665;  // m/s^2

/// One open-hold-close cycle. Times in seconds, angle in degrees.
struct DoorEvent {
  double start = 0.0;
  double peak_deg = 90.0;
  double open_duration = 1.5;
  double pause = 1.0;
  double close_duration = 1.5;

  double end() const { return start + open_duration + pause + close_duration; }
};

struct DoorScenario {
  double lever_arm = 0.7;  // hinge to sensor, m
  std::vector<DoorEvent> events;
  double rate_hz = 120.0;
  double duration = 60.0;  // s

  /// Throws InvalidArgument naming the first bad field or event.
  void validate() const;
};

/// Gyro values in rad/s, accelerometer values in m/s^2. Noise densities are
/// per sqrt(Hz); the per-sample standard deviation is density * sqrt(rate).
struct SensorErrorModel {
  Vec3 gyro_bias;
  double gyro_noise_density = deg_to_rad(0.007);
  Vec3 accel_bias;
  double accel_noise_density = 120e-6 * kGravity;
  std::uint64_t seed = 1;

  static SensorErrorModel ideal() {
    SensorErrorModel m;
    m.gyro_noise_density = 0.0;
    m.accel_noise_density = 0.0;
    return m;
  }
  void validate() const;
};

/// Door angle and its first two time derivatives.
struct ProfilePoint {
  double angle_deg = 0.0;
  double rate_deg_s = 0.0;
  double accel_deg_s2 = 0.0;
};

/// Minimum-jerk opening to the peak, a hold, and a minimum-jerk close.
/// Zero outside the event.
ProfilePoint angle_profile(const DoorEvent& event, double t);

/// Sum of all event profiles at time t.
ProfilePoint scenario_profile(const DoorScenario& scenario, double t);

struct Generated {
  RecordingSession session;
  HeadingSeries gt;
};

/// Samples the scenario on a uniform clock starting at t = 0. The door
/// frame has z along the hinge (up), x from the hinge to the sensor and y
/// along the direction of opening. With gt_rate_hz = 0 the ground truth
/// shares the sensor timestamps; otherwise it is sampled on its own clock.
Generated generate(const DoorScenario& scenario, const SensorErrorModel& errors,
                   const std::string& id = "sim", double gt_rate_hz = 0.0);

enum class Speed { slow, medium, fast };
std::string to_string(Speed s);
Speed speed_from_string(const std::string& s);
/// Nominal duration of a 90 degree swing at the given speed.
double nominal_swing_duration(Speed s);

struct CorpusConfig {
  std::size_t n_sessions = 16;
  std::size_t n_test_sessions = 2;  // the last sessions get role test
  std::vector<double> angles_deg = {15, 30, 45, 60, 75, 90};
  std::vector<Speed> speeds = {Speed::slow, Speed::medium, Speed::fast};
  std::size_t min_events = 9;
  std::size_t max_events = 11;
  double session_duration = 0.0;       // s; 0 = set by the events
  double test_session_duration = 0.0;  // s; 0 = same rule as training sessions
  double total_duration = 0.0;         // s over non-test sessions; overrides session_duration
  double lead_in = 5.0;                // stationary start, s
  double min_shut_pause = 2.0;         // s
  double max_shut_pause = 5.0;
  double min_open_pause = 0.5;
  double max_open_pause = 3.0;
  double min_lever_arm = 0.5;          // m
  double max_lever_arm = 0.8;
  double max_gyro_bias_deg_h = 50.0;   // per axis
  double min_gyro_bias_fraction = 0.0; // |bias| drawn from [fraction, 1] * max
  double max_accel_bias = 0.05;        // m/s^2 per axis
  double gyro_noise_density = deg_to_rad(0.007);
  double accel_noise_density = 120e-6 * kGravity;
  double rate_hz = 120.0;
  double gt_rate_hz = 0.0;
  std::uint64_t seed = 42;
  std::string dataset_id;              // default "sim-<seed>"

  void validate() const;
};

/// Scenario and error model for session `index`; deterministic in
/// (config.seed, index).
std::pair<DoorScenario, SensorErrorModel> corpus_session(const CorpusConfig& config,
                                                         std::size_t index);

/// Writes <id>_imu.csv, <id>_gt.csv for each session and manifest.json into
/// `out_dir`. Same config gives byte-identical files.
Manifest generate_corpus(const CorpusConfig& config, const std::filesystem::path& out_dir);

}  // namespace doorinet::sim
