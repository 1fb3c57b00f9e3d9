// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "doorinet/madgwick.hpp"
#include "doorinet/metrics.hpp"
#include "doorinet/window.hpp"

namespace doorinet {

/// Window boundaries of chained evaluation windows: the first window's
/// start followed by every window's end.
std::vector<double> evaluation_grid(std::span<const WindowSample> windows);

/// Heading from per-window increments, starting at 0 on the first window's
/// start time.
HeadingSeries heading_from_increments(std::span<const WindowSample> windows,
                                      std::span<const double> increments);

struct Estimate {
  std::string estimator;
  HeadingSeries heading;
};

/// Gyro integration, the filter and its thresholded variant on one stream.
std::vector<Estimate> baseline_estimates(std::span<const ImuSample> samples,
                                         const madgwick::Config& filter);

/// Scores each estimate against gt on the evaluation grid.
std::vector<MetricsRow> score(std::span<const Estimate> estimates, const HeadingSeries& gt,
                              std::span<const double> grid, const std::string& session,
                              const std::string& dataset_id);

}  // namespace doorinet
