// SPDX-License-Identifier: Apache-2.0
#include "doorinet/evaluation.hpp"

#include "doorinet/error.hpp"

namespace doorinet {

std::vector<double> evaluation_grid(std::span<const WindowSample> windows) {
  if (windows.empty()) throw InvalidArgument("evaluation_grid: no windows");
  std::vector<double> grid{windows.front().t_first};
  for (const WindowSample& w : windows) grid.push_back(w.t_last);
  return grid;
}

HeadingSeries heading_from_increments(std::span<const WindowSample> windows,
                                      std::span<const double> increments) {
  if (windows.size() != increments.size()) {
    throw InvalidArgument("heading_from_increments: window and increment counts differ");
  }
  if (windows.empty()) throw InvalidArgument("heading_from_increments: no windows");
  HeadingSeries h;
  h.push_back(windows.front().t_first, 0.0);
  double psi = 0.0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    psi += increments[i];
    h.push_back(windows[i].t_last, psi);
  }
  return h;
}

std::vector<Estimate> baseline_estimates(std::span<const ImuSample> samples,
                                         const madgwick::Config& filter) {
  std::vector<Estimate> out;
  out.push_back({"gyro-integration", integrate_gyro(samples, 0.0)});
  out.push_back({"madgwick", madgwick::run(samples, filter)});
  if (filter.stationary_threshold) {
    out.push_back({"madgwick-thresholded", madgwick::run_thresholded(samples, filter)});
  }
  return out;
}

std::vector<MetricsRow> score(std::span<const Estimate> estimates, const HeadingSeries& gt,
                              std::span<const double> grid, const std::string& session,
                              const std::string& dataset_id) {
  std::vector<MetricsRow> rows;
  for (const Estimate& e : estimates) {
    MetricsRow r = evaluate(e.heading, gt, grid);
    r.estimator = e.estimator;
    r.session = session;
    r.dataset_id = dataset_id;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace doorinet
