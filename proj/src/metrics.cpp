// SPDX-License-Identifier: Apache-2.0
#include "doorinet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "doorinet/error.hpp"

namespace doorinet {

using nlohmann::json;

namespace {

void check_pair(std::span<const double> y, std::span<const double> y_hat, const char* what) {
  if (y.empty()) throw InvalidArgument(std::string(what) + ": empty input");
  if (y.size() != y_hat.size()) throw InvalidArgument(std::string(what) + ": length mismatch");
}

}  // namespace

double rmse(std::span<const double> y, std::span<const double> y_hat) {
  check_pair(y, y_hat, "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
  return std::sqrt(s / static_cast<double>(y.size()));
}

double lpd(std::span<const double> y, std::span<const double> y_hat) {
  check_pair(y, y_hat, "lpd");
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    a += y[i];
    b += y_hat[i];
  }
  return std::abs(a - b);
}

double mad(std::span<const double> y, std::span<const double> y_hat) {
  check_pair(y, y_hat, "mad");
  double a = 0.0, b = 0.0, best = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    a += y[i];
    b += y_hat[i];
    best = std::max(best, std::abs(a - b));
  }
  return best;
}

MetricsRow evaluate(const HeadingSeries& estimated, const HeadingSeries& gt,
                    std::span<const double> grid) {
  estimated.validate();
  gt.validate();
  if (estimated.empty() || gt.empty()) throw InvalidArgument("evaluate: empty series");
  const double lo = std::max(estimated.t.front(), gt.t.front());
  const double hi = std::min(estimated.t.back(), gt.t.back());
  if (lo > hi) throw InvalidArgument("evaluate: series do not overlap in time");
  std::vector<double> times;
  if (grid.empty()) {
    for (double t : estimated.t) {
      if (t >= lo && t <= hi) times.push_back(t);
    }
  } else {
    times.assign(grid.begin(), grid.end());
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] < lo || times[i] > hi || (i > 0 && !(times[i] > times[i - 1]))) {
        throw InvalidArgument("evaluate: grid must increase and lie inside the overlap");
      }
    }
  }
  if (times.size() < 2) throw InvalidArgument("evaluate: overlap holds fewer than 2 grid points");

  const std::size_t n = times.size() - 1;
  std::vector<double> y(n), y_hat(n), cum_y(n), cum_hat(n);
  double prev_gt = gt.at(times[0]);
  double prev_est = estimated.at(times[0]);
  double sy = 0.0, sh = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = gt.at(times[i + 1]);
    const double e = estimated.at(times[i + 1]);
    y[i] = g - prev_gt;
    y_hat[i] = e - prev_est;
    prev_gt = g;
    prev_est = e;
    sy += y[i];
    sh += y_hat[i];
    cum_y[i] = sy;
    cum_hat[i] = sh;
  }
  MetricsRow row;
  row.rmse_deg = rmse(cum_y, cum_hat);
  row.lpd_deg = lpd(y, y_hat);
  row.mad_deg = mad(y, y_hat);
  row.n_windows = n;
  return row;
}

std::vector<MetricsRow> pooled_rows(std::span<const MetricsRow> rows) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const MetricsRow*>> groups;
  for (const MetricsRow& r : rows) {
    if (!groups.contains(r.estimator)) order.push_back(r.estimator);
    groups[r.estimator].push_back(&r);
  }
  std::vector<MetricsRow> out;
  for (const std::string& name : order) {
    const auto& g = groups[name];
    MetricsRow p;
    p.estimator = name;
    p.session = "all";
    p.dataset_id = g.front()->dataset_id;
    double sq = 0.0, lpd_sum = 0.0;
    for (const MetricsRow* r : g) {
      sq += r->rmse_deg * r->rmse_deg * static_cast<double>(r->n_windows);
      lpd_sum += r->lpd_deg;
      p.mad_deg = std::max(p.mad_deg, r->mad_deg);
      p.n_windows += r->n_windows;
    }
    p.rmse_deg = p.n_windows ? std::sqrt(sq / static_cast<double>(p.n_windows)) : 0.0;
    p.lpd_deg = lpd_sum / static_cast<double>(g.size());
    out.push_back(p);
  }
  return out;
}

std::string report_to_json(const MetricsReport& report) {
  json rows = json::array();
  for (const MetricsRow& r : report.rows) {
    rows.push_back({{"estimator", r.estimator},
                    {"session", r.session},
                    {"dataset_id", r.dataset_id},
                    {"rmse_deg", r.rmse_deg},
                    {"lpd_deg", r.lpd_deg},
                    {"mad_deg", r.mad_deg},
                    {"n_windows", r.n_windows}});
  }
  const json j = {{"schema_version", report.schema_version},
                  {"dataset_id", report.dataset_id},
                  {"rows", rows}};
  return j.dump(2) + "\n";
}

MetricsReport report_from_json(const std::string& text, const std::string& where) {
  MetricsReport r;
  try {
    const json j = json::parse(text);
    r.schema_version = j.at("schema_version").get<int>();
    r.dataset_id = j.at("dataset_id").get<std::string>();
    for (const json& row : j.at("rows")) {
      MetricsRow m;
      m.estimator = row.at("estimator").get<std::string>();
      m.session = row.value("session", std::string("all"));
      m.dataset_id = row.value("dataset_id", r.dataset_id);
      m.rmse_deg = row.at("rmse_deg").get<double>();
      m.lpd_deg = row.at("lpd_deg").get<double>();
      m.mad_deg = row.at("mad_deg").get<double>();
      m.n_windows = row.value("n_windows", std::size_t{0});
      if (m.rmse_deg < 0.0 || m.lpd_deg < 0.0 || m.mad_deg < 0.0) {
        throw FormatError(where + ": negative metric in row '" + m.estimator + "'");
      }
      r.rows.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw FormatError(where + ": " + e.what());
  }
  return r;
}

void save_report(const std::filesystem::path& path, const MetricsReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << report_to_json(report);
}

MetricsReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open report '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str(), path.string());
}

std::string format_table(std::span<const MetricsRow> rows) {
  std::size_t w_est = 9, w_ses = 7;
  for (const MetricsRow& r : rows) {
    w_est = std::max(w_est, r.estimator.size());
    w_ses = std::max(w_ses, r.session.size());
  }
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %-*s  %10s  %10s  %10s  %8s\n", static_cast<int>(w_est),
                "Estimator", static_cast<int>(w_ses), "Session", "RMSE[deg]", "LPD[deg]",
                "MAD[deg]", "Windows");
  out << buf << std::string(w_est + w_ses + 50, '-') << '\n';
  for (const MetricsRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %-*s  %10.3f  %10.3f  %10.3f  %8zu\n",
                  static_cast<int>(w_est), r.estimator.c_str(), static_cast<int>(w_ses),
                  r.session.c_str(), r.rmse_deg, r.lpd_deg, r.mad_deg, r.n_windows);
    out << buf;
  }
  return out.str();
}

MetricsReport merge_reports(std::span<const MetricsReport> reports, bool allow_mixed) {
  if (reports.empty()) throw InvalidArgument("compare: need at least one report");
  MetricsReport out;
  out.dataset_id = reports.front().dataset_id;
  for (const MetricsReport& r : reports) {
    if (r.schema_version != MetricsReport::kSchemaVersion) {
      throw FormatError("compare: report schema_version " + std::to_string(r.schema_version) +
                        " differs from " + std::to_string(MetricsReport::kSchemaVersion));
    }
    if (r.dataset_id != out.dataset_id) {
      if (!allow_mixed) {
        throw InvalidArgument("compare: reports cover different datasets ('" + out.dataset_id +
                              "' and '" + r.dataset_id + "'); pass --allow-mixed to merge anyway");
      }
      out.dataset_id = "mixed";
    }
    for (MetricsRow row : r.rows) {
      if (row.dataset_id.empty()) row.dataset_id = r.dataset_id;
      out.rows.push_back(std::move(row));
    }
  }
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const MetricsRow& a, const MetricsRow& b) { return a.rmse_deg < b.rmse_deg; });
  return out;
}

}  // namespace doorinet
