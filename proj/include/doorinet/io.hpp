// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "doorinet/attitude.hpp"

namespace doorinet {

/// One recording from a single IMU. Samples are time-sorted with unique
/// timestamps; gt (when present) is the reference heading on its own clock.
struct RecordingSession {
  std::string imu_id;
  double rate_hz = 0.0;
  std::vector<ImuSample> samples;
  std::optional<HeadingSeries> gt;

  double duration() const { return samples.empty() ? 0.0 : samples.back().t - samples.front().t; }
};

enum class CsvSchema {
  imu,          // t, fx, fy, fz, wx, wy, wz  (s, m/s^2, deg/s)
  ground_truth  // t, heading_deg
};

/// Column names of a schema in canonical order.
std::span<const std::string_view> schema_columns(CsvSchema schema);

/// Reads an IMU CSV. Columns are located by header name in any order; extra
/// columns are ignored. Rows are sorted by time and rows repeating an
/// earlier timestamp are dropped. Errors name the file, line and column.
RecordingSession load_imu_csv(const std::filesystem::path& path, const std::string& imu_id = {});

/// Reads a ground-truth heading CSV with the same sorting rules.
HeadingSeries load_gt_csv(const std::filesystem::path& path);

void write_imu_csv(const std::filesystem::path& path, std::span<const ImuSample> samples);
void write_gt_csv(const std::filesystem::path& path, const HeadingSeries& gt);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

/// Sample rate from the median timestamp spacing; 0 for fewer than 2 samples.
double estimate_rate_hz(std::span<const ImuSample> samples);

}  // namespace doorinet
