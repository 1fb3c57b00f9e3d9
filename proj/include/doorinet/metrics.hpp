// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "doorinet/attitude.hpp"

namespace doorinet {

/// Root mean square of y - y_hat.
double rmse(std::span<const double> y, std::span<const double> y_hat);
/// |sum(y) - sum(y_hat)|.
double lpd(std::span<const double> y, std::span<const double> y_hat);
/// Largest gap between the running sums of y and y_hat.
double mad(std::span<const double> y, std::span<const double> y_hat);

struct MetricsRow {
  std::string estimator;
  std::string session;
  double rmse_deg = 0.0;  // of the accumulated heading
  double lpd_deg = 0.0;
  double mad_deg = 0.0;
  std::size_t n_windows = 0;
  std::string dataset_id;
};

/// Compares two headings on a common grid. Both are interpolated onto
/// `grid` (default: the estimated series' timestamps inside the overlap),
/// turned into increments between grid points, and scored: rmse on the
/// accumulated headings, lpd and mad on the increments. Throws when the
/// series do not overlap.
MetricsRow evaluate(const HeadingSeries& estimated, const HeadingSeries& gt,
                    std::span<const double> grid = {});

struct MetricsReport {
  static constexpr int kSchemaVersion = 1;
  int schema_version = kSchemaVersion;
  std::string dataset_id;
  std::vector<MetricsRow> rows;
};

/// Pools per-session rows of each estimator into one row with session
/// "all": rmse over all points, mean lpd, largest mad.
std::vector<MetricsRow> pooled_rows(std::span<const MetricsRow> rows);

std::string report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const std::string& text, const std::string& where = "report");
void save_report(const std::filesystem::path& path, const MetricsReport& report);
MetricsReport load_report(const std::filesystem::path& path);

/// Fixed-width text table.
std::string format_table(std::span<const MetricsRow> rows);

/// Rows of all reports sorted by ascending RMSE (stable). Throws on a
/// schema-version mismatch, or on differing dataset ids unless allow_mixed.
MetricsReport merge_reports(std::span<const MetricsReport> reports, bool allow_mixed = false);

}  // namespace doorinet
