// SPDX-License-Identifier: Apache-2.0
#include "doorinet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "doorinet/error.hpp"
#include "doorinet/nn/tensor.hpp"

namespace doorinet {

AngularRate estimate_gyro_bias(std::span<const ImuSample> samples, std::size_t window) {
  if (window == 0) throw InvalidArgument("calibrate_gyro: window must be positive");
  if (samples.size() < window) {
    throw InvalidArgument("calibrate_gyro: session has " + std::to_string(samples.size()) +
                          " samples, fewer than the window of " + std::to_string(window));
  }
  AngularRate b;
  for (std::size_t i = 0; i < window; ++i) {
    b.x += samples[i].w.x;
    b.y += samples[i].w.y;
    b.z += samples[i].w.z;
  }
  const double n = static_cast<double>(window);
  return {b.x / n, b.y / n, b.z / n};
}

RecordingSession calibrate_gyro(const RecordingSession& session, std::size_t window) {
  const AngularRate b = estimate_gyro_bias(session.samples, window);
  RecordingSession out = session;
  for (ImuSample& s : out.samples) {
    s.w.x -= b.x;
    s.w.y -= b.y;
    s.w.z -= b.z;
  }
  return out;
}

std::vector<Interval> detect_shut_periods(std::span<const ImuSample> samples,
                                          double threshold_rad_s, double min_duration_s) {
  std::vector<Interval> out;
  std::size_t i = 0;
  while (i < samples.size()) {
    if (!(samples[i].w.norm() < threshold_rad_s)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < samples.size() && samples[j].w.norm() < threshold_rad_s) ++j;
    const Interval iv{i, j, samples[i].t, samples[j - 1].t};
    if (iv.duration() >= min_duration_s) out.push_back(iv);
    i = j;
  }
  return out;
}

std::vector<Interval> select_shut_intervals(std::span<const Interval> stationary,
                                            std::span<const double> heading, double tolerance_deg) {
  std::vector<Interval> out;
  double reference = 0.0;
  for (const Interval& iv : stationary) {
    if (iv.end > heading.size() || iv.begin >= iv.end) {
      throw InvalidArgument("select_shut_intervals: interval outside the heading series");
    }
    if (out.empty() || std::abs(heading[iv.begin] - reference) <= tolerance_deg) {
      out.push_back(iv);
      reference = heading[iv.end - 1];
    }
  }
  return out;
}

HeadingSeries enforce_zero_drift(const HeadingSeries& heading, std::span<const Interval> shut) {
  for (std::size_t k = 0; k < shut.size(); ++k) {
    if (shut[k].begin >= shut[k].end || shut[k].end > heading.size()) {
      throw InvalidArgument("enforce_zero_drift: interval " + std::to_string(k) +
                            " lies outside the series");
    }
    if (k > 0 && shut[k].begin < shut[k - 1].end) {
      throw InvalidArgument("enforce_zero_drift: intervals " + std::to_string(k - 1) + " and " +
                            std::to_string(k) + " overlap or are unsorted");
    }
  }
  HeadingSeries out = heading;
  double offset = 0.0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (next < shut.size() && i == shut[next].begin) offset = heading.heading_deg[i];
    const bool inside = next < shut.size() && i >= shut[next].begin && i < shut[next].end;
    out.heading_deg[i] = inside ? 0.0 : heading.heading_deg[i] - offset;
    if (next < shut.size() && i + 1 == shut[next].end) ++next;
  }
  return out;
}

std::vector<WindowSample> make_windows(const RecordingSession& session, const HeadingSeries& gt,
                                       const WindowOptions& options, const std::string& experiment) {
  if (options.window_len < 2) throw InvalidArgument("make_windows: window_len must be >= 2");
  if (options.stride == 0) throw InvalidArgument("make_windows: stride must be positive");
  gt.validate();
  if (gt.size() < 2) throw InvalidArgument("make_windows: ground truth needs >= 2 points");
  const auto& s = session.samples;
  if (s.size() < options.window_len) return {};

  const double rate = session.rate_hz > 0.0 ? session.rate_hz : estimate_rate_hz(s);
  const double window_span = static_cast<double>(options.window_len) / rate;
  if (gt.t.front() > s.front().t + window_span || gt.t.back() < s.back().t - window_span) {
    throw InvalidArgument("make_windows: ground truth does not cover the session");
  }
  for (std::size_t i = 1; i < gt.size(); ++i) {
    if (gt.t[i] - gt.t[i - 1] > window_span && gt.t[i] > s.front().t && gt.t[i - 1] < s.back().t) {
      std::ostringstream msg;
      msg << "make_windows: ground-truth gap of " << gt.t[i] - gt.t[i - 1] << " s at t = "
          << gt.t[i - 1] << " exceeds one window (" << window_span << " s)";
      throw InvalidArgument(msg.str());
    }
  }

  const std::string id = experiment.empty() ? session.imu_id : experiment;
  std::vector<WindowSample> out;
  for (std::size_t k = 0; k + options.window_len <= s.size(); k += options.stride) {
    WindowSample w;
    w.gyro.reserve(options.window_len);
    w.accel.reserve(options.window_len);
    for (std::size_t j = k; j < k + options.window_len; ++j) {
      w.gyro.push_back(s[j].w);
      w.accel.push_back(s[j].f);
    }
    w.t_first = s[k].t;
    w.t_last = s[k + options.window_len - 1].t;
    w.target_deg = gt.at(w.t_last) - gt.at(w.t_first);
    w.experiment = id;
    out.push_back(std::move(w));
  }
  return out;
}

HeadingSeries reconstruct_heading(std::span<const double> increments, double psi0,
                                  std::span<const double> t_end) {
  if (!t_end.empty() && t_end.size() != increments.size()) {
    throw InvalidArgument("reconstruct_heading: time and increment lengths differ");
  }
  HeadingSeries out;
  out.t.reserve(increments.size());
  out.heading_deg.reserve(increments.size());
  double psi = psi0;
  for (std::size_t i = 0; i < increments.size(); ++i) {
    psi += increments[i];
    out.push_back(t_end.empty() ? static_cast<double>(i + 1) : t_end[i], psi);
  }
  return out;
}

std::vector<double> window_end_times(std::span<const WindowSample> windows) {
  std::vector<double> t;
  t.reserve(windows.size());
  for (const WindowSample& w : windows) t.push_back(w.t_last);
  return t;
}

std::vector<double> window_targets(std::span<const WindowSample> windows) {
  std::vector<double> y;
  y.reserve(windows.size());
  for (const WindowSample& w : windows) y.push_back(w.target_deg);
  return y;
}

Split split_train_val(std::span<const WindowSample> windows, double val_fraction,
                      std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw InvalidArgument("split_train_val: val_fraction must lie in (0, 1)");
  }
  std::vector<std::string> experiments;
  for (const WindowSample& w : windows) {
    if (std::find(experiments.begin(), experiments.end(), w.experiment) == experiments.end()) {
      experiments.push_back(w.experiment);
    }
  }
  if (experiments.size() < 2) {
    throw InvalidArgument("split_train_val: need at least 2 experiments, found " +
                          std::to_string(experiments.size()));
  }
  std::sort(experiments.begin(), experiments.end());
  nn::Rng rng(seed);
  for (std::size_t i = experiments.size(); i > 1; --i) {
    std::swap(experiments[i - 1], experiments[rng.below(i)]);
  }
  const auto n = static_cast<double>(experiments.size());
  const std::size_t n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(val_fraction * n)), 1, experiments.size() - 1);
  Split out;
  out.val_experiments.assign(experiments.begin(), experiments.begin() + static_cast<long>(n_val));
  std::sort(out.val_experiments.begin(), out.val_experiments.end());
  for (const WindowSample& w : windows) {
    const bool is_val = std::binary_search(out.val_experiments.begin(), out.val_experiments.end(),
                                           w.experiment);
    (is_val ? out.val : out.train).push_back(w);
  }
  return out;
}

}  // namespace doorinet
