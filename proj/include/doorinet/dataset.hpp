// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "doorinet/madgwick.hpp"
#include "doorinet/pipeline.hpp"

namespace doorinet {

enum class Role { train, val, test };
std::string to_string(Role r);
Role role_from_string(const std::string& s);

/// One session listed in a manifest. Paths are relative to the manifest's
/// directory unless absolute.
struct SessionEntry {
  std::string id;
  Role role = Role::train;
  std::filesystem::path imu_file;
  std::optional<std::filesystem::path> gt_file;      // heading CSV
  std::optional<std::filesystem::path> gt_imu_file;  // reference IMU, filtered into a heading
  std::size_t calibration_window = 40;
};

struct Manifest {
  static constexpr int kSchemaVersion = 1;

  std::string dataset_id;
  double rate_hz = 120.0;
  bool preprocessed = false;  // sessions already calibrated and zero-drifted
  std::vector<SessionEntry> sessions;
  std::filesystem::path base_dir;  // set by load_manifest

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::vector<const SessionEntry*> with_role(Role r) const;
};

/// Reads and validates a JSON manifest; unknown keys are rejected.
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

struct PreprocessOptions {
  std::size_t window_len = 20;
  std::size_t train_stride = 20;
  double shut_threshold = 0.05;     // rad/s
  double shut_min_duration = 2.0;   // s
  double shut_tolerance_deg = 10.0;
  bool calibrate_test = false;
  madgwick::Config gt_filter;       // used when a session gives a reference IMU
};

/// A session after preprocessing; gt is sampled at the sensor timestamps.
struct PreparedSession {
  SessionEntry entry;
  RecordingSession session;
  HeadingSeries gt;
  std::vector<Interval> shut;
};

/// Loads one session and applies the preprocessing for its role: gyro
/// calibration (train and val, optionally test), ground truth from the
/// heading file or the thresholded filter on the reference IMU, and zero
/// drift at detected shut periods.
PreparedSession prepare_session(const Manifest& manifest, const SessionEntry& entry,
                                const PreprocessOptions& options);

/// Training and validation windows. Sessions with role val form the
/// validation set; when there are none, windows are split by experiment
/// with `val_fraction` and `seed`.
Split training_windows(const Manifest& manifest, const PreprocessOptions& options,
                       double val_fraction, std::uint64_t seed);

/// Evaluation windows chain end to start (stride window_len - 1), so the
/// running sum of targets is the heading at each window end.
std::vector<WindowSample> evaluation_windows(const PreparedSession& prepared,
                                             std::size_t window_len);

}  // namespace doorinet
