// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "doorinet/io.hpp"
#include "doorinet/window.hpp"

namespace doorinet {

/// Mean gyro reading over the first `window` samples.
AngularRate estimate_gyro_bias(std::span<const ImuSample> samples, std::size_t window = 40);

/// Subtracts the per-axis mean of the first `window` gyro samples from every
/// gyro reading. The session must start stationary.
RecordingSession calibrate_gyro(const RecordingSession& session, std::size_t window = 40);

/// Half-open sample range [begin, end) with its first and last timestamps.
struct Interval {
  std::size_t begin = 0;
  std::size_t end = 0;
  double t_begin = 0.0;
  double t_end = 0.0;

  double duration() const { return t_end - t_begin; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Maximal runs with |w| < threshold_rad_s whose first-to-last sample span
/// is at least min_duration_s.
std::vector<Interval> detect_shut_periods(std::span<const ImuSample> samples,
                                          double threshold_rad_s = 0.05,
                                          double min_duration_s = 2.0);

/// Keeps the stationary intervals that look like the closed door: the first
/// one, and every later one whose heading at its start lies within
/// `tolerance_deg` of the heading at the end of the previous kept interval.
/// Pauses with the door held open are dropped. `heading` is indexed like the
/// samples the intervals came from.
std::vector<Interval> select_shut_intervals(std::span<const Interval> stationary,
                                            std::span<const double> heading,
                                            double tolerance_deg = 10.0);

/// Piecewise re-zeroing: at the start s of each interval the value heading[s]
/// is subtracted from s onward, and the interval itself is set to exactly 0.
/// Intervals must be sorted and non-overlapping.
HeadingSeries enforce_zero_drift(const HeadingSeries& heading, std::span<const Interval> shut);

struct WindowOptions {
  std::size_t window_len = 20;
  std::size_t stride = 20;
};

/// Cuts the session into windows of window_len samples every `stride`
/// samples. Each target is gt(t_last) - gt(t_first), with gt linearly
/// interpolated onto the sensor timestamps. Throws when gt has a gap longer
/// than one window or does not cover the session.
std::vector<WindowSample> make_windows(const RecordingSession& session, const HeadingSeries& gt,
                                       const WindowOptions& options = {},
                                       const std::string& experiment = {});

/// Running sum of window increments plus psi0, one point per window. Times
/// are taken from `t_end` when given, otherwise 1, 2, 3, ...
HeadingSeries reconstruct_heading(std::span<const double> increments, double psi0 = 0.0,
                                  std::span<const double> t_end = {});

/// End timestamps of the windows.
std::vector<double> window_end_times(std::span<const WindowSample> windows);
std::vector<double> window_targets(std::span<const WindowSample> windows);

struct Split {
  std::vector<WindowSample> train;
  std::vector<WindowSample> val;
  std::vector<std::string> val_experiments;
};

/// Seeded split by experiment: round(val_fraction * experiments) whole
/// experiments (at least one, at most all but one) go to validation.
Split split_train_val(std::span<const WindowSample> windows, double val_fraction,
                      std::uint64_t seed);

}  // namespace doorinet
