// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "doorinet/error.hpp"
#include "doorinet/evaluation.hpp"
#include "doorinet/metrics.hpp"
#include "doorinet/pipeline.hpp"
#include "doorinet/simulator.hpp"
#include "support/oracles.hpp"

using namespace doorinet;

namespace {

MetricsRow row(std::string est, double rmse, std::string dataset = {}) {
  MetricsRow r;
  r.estimator = std::move(est);
  r.session = "s";
  r.rmse_deg = rmse;
  r.lpd_deg = rmse / 2;
  r.mad_deg = rmse;
  r.n_windows = 10;
  r.dataset_id = std::move(dataset);
  return r;
}

}  // namespace

TEST_CASE("metric examples") {
  const std::vector<double> z{0, 0}, e{3, 4};
  CHECK(rmse(z, e) == doctest::Approx(3.5355339));
  CHECK(lpd(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 4}) == 1.0);
  CHECK(lpd(std::vector<double>{1, -1}, std::vector<double>{-1, 1}) == 0.0);
  CHECK(mad(std::vector<double>{1, -1}, std::vector<double>{-1, 1}) == 2.0);
  CHECK_THROWS_AS(mad(std::vector<double>{}, std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(rmse(std::vector<double>{1}, std::vector<double>{1, 2}), InvalidArgument);
  CHECK_THROWS_AS(mad(std::vector<double>{1}, std::vector<double>{}), InvalidArgument);
}

TEST_CASE("metrics match oracles on random inputs") {
  std::mt19937_64 g(21);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 1 + g() % 60;
    std::vector<double> y(len), yh(len);
    for (std::size_t i = 0; i < len; ++i) {
      y[i] = n(g);
      yh[i] = y[i] + 0.3 * n(g);
    }
    CHECK(rmse(y, yh) == doctest::Approx(oracle::rmse(y, yh)).epsilon(1e-12));
    CHECK(lpd(y, yh) == doctest::Approx(oracle::lpd(y, yh)).epsilon(1e-12));
    CHECK(mad(y, yh) == doctest::Approx(oracle::mad(y, yh)).epsilon(1e-12));
    CHECK(mad(y, yh) >= lpd(y, yh) - 1e-12);
    CHECK(rmse(y, y) == 0.0);
  }
}

TEST_CASE("evaluate") {
  HeadingSeries gt, off;
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.1 * i;
    gt.push_back(t, 30.0 * std::sin(t));
    off.push_back(t, 30.0 * std::sin(t) + 0.5 * i);
  }
  const MetricsRow same = evaluate(gt, gt);
  CHECK(same.rmse_deg == 0.0);
  CHECK(same.lpd_deg == 0.0);
  CHECK(same.mad_deg == 0.0);
  CHECK(same.n_windows == 100);

  // A constant per-window offset c accumulates to n * |c|.
  const MetricsRow o = evaluate(off, gt);
  CHECK(o.lpd_deg == doctest::Approx(50.0));
  CHECK(o.mad_deg == doctest::Approx(50.0));

  // A constant heading shift does not change the increments.
  HeadingSeries shifted = gt;
  for (double& h : shifted.heading_deg) h += 7.0;
  CHECK(evaluate(shifted, gt).rmse_deg == doctest::Approx(0.0).epsilon(1e-12));

  const std::vector<double> grid{0.0, 2.5, 5.0, 10.0};
  CHECK(evaluate(gt, gt, grid).n_windows == 3);
  CHECK_THROWS_AS(evaluate(gt, gt, std::vector<double>{0.0, 20.0}), InvalidArgument);
  HeadingSeries late;
  late.push_back(50, 0);
  late.push_back(60, 0);
  CHECK_THROWS_WITH_AS(evaluate(late, gt), doctest::Contains("overlap"), InvalidArgument);
}

TEST_CASE("gyro-integration error grows with bias") {
  sim::DoorScenario sc;
  sc.duration = 120;
  sc.events = {{5, 90, 1.5, 1.0, 1.5}, {40, 60, 1.5, 1.0, 1.5}, {80, 30, 1.0, 1.0, 1.0}};
  double prev = -1.0;
  for (double bias_deg_h : {5.0, 20.0, 80.0}) {
    sim::SensorErrorModel e;
    e.gyro_bias = {0, 0, deg_to_rad(bias_deg_h / 3600.0)};
    e.seed = 4;
    const sim::Generated g = sim::generate(sc, e);
    const MetricsRow r = evaluate(integrate_gyro(g.session.samples, 0.0), g.gt);
    CHECK(r.rmse_deg > prev);
    prev = r.rmse_deg;
  }
}

TEST_CASE("evaluation grid and increments") {
  RecordingSession s;
  HeadingSeries gt;
  for (int i = 0; i < 200; ++i) {
    s.samples.push_back({i / 100.0, {0, 0, 9.8}, {}});
    gt.push_back(i / 100.0, 0.5 * i);
  }
  PreparedSession p;
  p.session = s;
  p.gt = gt;
  const std::vector<WindowSample> w = evaluation_windows(p, 20);
  const std::vector<double> grid = evaluation_grid(w);
  REQUIRE(grid.size() == w.size() + 1);
  CHECK(grid[0] == w[0].t_first);
  for (std::size_t k = 0; k < w.size(); ++k) CHECK(grid[k + 1] == w[k].t_last);
  const HeadingSeries h = heading_from_increments(w, window_targets(w));
  CHECK(h.heading_deg.front() == 0.0);
  const MetricsRow r = evaluate(h, gt, grid);
  CHECK(r.rmse_deg < 1e-9);
  CHECK_THROWS_AS(heading_from_increments(w, std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("baselines and scoring") {
  sim::DoorScenario sc;
  sc.duration = 30;
  sc.events = {{5, 70, 2.5, 2.0, 2.5}};
  const sim::Generated g = sim::generate(sc, sim::SensorErrorModel::ideal());
  madgwick::Config f;
  f.sample_period = 1.0 / 120.0;
  f.stationary_threshold = 0.05;
  const std::vector<Estimate> est = baseline_estimates(g.session.samples, f);
  REQUIRE(est.size() == 3);
  CHECK(est[0].estimator == "gyro-integration");
  const std::vector<double> grid{0.0, 10.0, 20.0, 30.0};
  const std::vector<MetricsRow> rows = score(est, g.gt, grid, "x", "d");
  REQUIRE(rows.size() == 3);
  for (const MetricsRow& r : rows) {
    CHECK(r.session == "x");
    CHECK(r.dataset_id == "d");
    CHECK(r.rmse_deg < 0.5);
  }
}

TEST_CASE("pooled rows") {
  std::vector<MetricsRow> rows{row("a", 3.0), row("b", 1.0), row("a", 4.0)};
  rows[0].lpd_deg = 1;
  rows[2].lpd_deg = 3;
  rows[2].n_windows = 30;
  const std::vector<MetricsRow> p = pooled_rows(rows);
  REQUIRE(p.size() == 2);
  CHECK(p[0].estimator == "a");
  CHECK(p[0].session == "all");
  CHECK(p[0].n_windows == 40);
  CHECK(p[0].lpd_deg == doctest::Approx(2.0));
  CHECK(p[0].mad_deg == 4.0);
  // RMSE pools squared errors weighted by point count.
  CHECK(p[0].rmse_deg == doctest::Approx(std::sqrt((10 * 9.0 + 30 * 16.0) / 40.0)));
}

TEST_CASE("report serialization and merging") {
  MetricsReport r;
  r.dataset_id = "sim-1";
  r.rows = {row("net", 2.25, "sim-1"), row("gyro", 1.5, "sim-1")};
  const MetricsReport back = report_from_json(report_to_json(r));
  REQUIRE(back.rows.size() == 2);
  CHECK(back.dataset_id == "sim-1");
  CHECK(back.rows[0].estimator == "net");
  CHECK(back.rows[0].rmse_deg == 2.25);
  CHECK(back.rows[1].n_windows == 10);

  const std::filesystem::path p = std::filesystem::temp_directory_path() / "doorinet_report.json";
  save_report(p, r);
  CHECK(load_report(p).rows.size() == 2);
  std::filesystem::remove(p);
  CHECK_THROWS_AS(load_report(p), Error);

  CHECK_THROWS_AS(report_from_json("{not json"), FormatError);
  CHECK_THROWS_AS(report_from_json(R"({"schema_version":1,"dataset_id":"x"})"), FormatError);
  CHECK_THROWS_AS(
      report_from_json(R"({"schema_version":1,"dataset_id":"x","rows":[{"estimator":"a","rmse_deg":-1,"lpd_deg":0,"mad_deg":0}]})"),
      FormatError);

  MetricsReport other;
  other.dataset_id = "sim-1";
  other.rows = {row("madgwick", 1.75, "sim-1")};
  const std::vector<MetricsReport> both{r, other};
  const MetricsReport m = merge_reports(both);
  REQUIRE(m.rows.size() == 3);
  CHECK(m.rows[0].estimator == "gyro");
  CHECK(m.rows[1].estimator == "madgwick");
  CHECK(m.rows[2].estimator == "net");

  MetricsReport foreign = other;
  foreign.dataset_id = "real";
  const std::vector<MetricsReport> mixed{r, foreign};
  CHECK_THROWS_WITH_AS(merge_reports(mixed), doctest::Contains("--allow-mixed"), InvalidArgument);
  CHECK(merge_reports(mixed, true).dataset_id == "mixed");

  MetricsReport old = other;
  old.schema_version = 99;
  const std::vector<MetricsReport> versions{r, old};
  CHECK_THROWS_WITH_AS(merge_reports(versions), doctest::Contains("schema_version"), FormatError);
  CHECK_THROWS_AS(merge_reports(std::vector<MetricsReport>{}), InvalidArgument);

  const std::string table = format_table(m.rows);
  CHECK(table.find("madgwick") != std::string::npos);
  CHECK(table.find("1.750") != std::string::npos);
}
