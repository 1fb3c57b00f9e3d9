// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "doorinet/dataset.hpp"
#include "doorinet/error.hpp"
#include "doorinet/pipeline.hpp"
#include "doorinet/simulator.hpp"
#include "json.hpp"

using namespace doorinet;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("doorinet_pipeline_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::vector<ImuSample> still(std::size_t n, double rate, AngularRate w = {}) {
  std::vector<ImuSample> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = {i / rate, {0, 0, sim::kGravity}, w};
  return s;
}

HeadingSeries series(const std::vector<double>& t, const std::vector<double>& h) {
  HeadingSeries s;
  s.t = t;
  s.heading_deg = h;
  return s;
}

// Brute-force scan used as the oracle for shut-period detection.
std::vector<Interval> scan(const std::vector<ImuSample>& s, double thr, double min_dur) {
  std::vector<Interval> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!(s[i].w.norm() < thr)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && s[j].w.norm() < thr) ++j;
    if (s[j - 1].t - s[i].t >= min_dur) out.push_back({i, j, s[i].t, s[j - 1].t});
    i = j;
  }
  return out;
}

}  // namespace

TEST_CASE("IMU CSV loading") {
  const fs::path d = scratch_dir("csv");
  SUBCASE("well-formed file") {
    write(d / "a.csv", "t,fx,fy,fz,wx,wy,wz\n0,0,0,9.8,0,0,1\n0.01,0,0,9.8,0,0,2\n0.02,0,0,9.8,0,0,3\n");
    const RecordingSession s = load_imu_csv(d / "a.csv", "a");
    REQUIRE(s.samples.size() == 3);
    CHECK(s.samples[2].w.z == doctest::Approx(deg_to_rad(3.0)));
    CHECK(s.rate_hz == doctest::Approx(100.0));
    CHECK(s.imu_id == "a");
  }
  SUBCASE("shuffled rows come back sorted, duplicates dropped") {
    write(d / "b.csv", "# comment\nwz,t,fx,fy,fz,wx,wy,extra\n3,0.02,0,0,9.8,0,0,x\n1,0,0,0,9.8,0,0,y\n2,0.01,0,0,9.8,0,0,z\n9,0.01,0,0,9.8,0,0,z\n");
    const RecordingSession s = load_imu_csv(d / "b.csv");
    REQUIRE(s.samples.size() == 3);
    CHECK(s.samples[0].t == 0.0);
    CHECK(s.samples[1].t == 0.01);
    CHECK(s.samples[1].w.z == doctest::Approx(deg_to_rad(2.0)));
  }
  SUBCASE("missing column is named") {
    write(d / "c.csv", "t,fx,fy,fz,wx,wy\n0,0,0,9.8,0,0\n");
    CHECK_THROWS_WITH_AS(load_imu_csv(d / "c.csv"), doctest::Contains("wz"), FormatError);
  }
  SUBCASE("bad value names file, line and column") {
    write(d / "e.csv", "t,fx,fy,fz,wx,wy,wz\n0,0,0,9.8,0,0,1\n0.01,0,abc,9.8,0,0,2\n");
    CHECK_THROWS_WITH_AS(load_imu_csv(d / "e.csv"), doctest::Contains("e.csv:3"), FormatError);
    CHECK_THROWS_WITH_AS(load_imu_csv(d / "e.csv"), doctest::Contains("fy"), FormatError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_imu_csv(d / "nope.csv"), Error); }
  SUBCASE("round trip") {
    const sim::Generated g = sim::generate({0.7, {{1.0, 40.0, 1.0, 1.0, 1.0}}, 120.0, 6.0}, {}, "rt");
    write_imu_csv(d / "rt.csv", g.session.samples);
    write_gt_csv(d / "rt_gt.csv", g.gt);
    const RecordingSession s = load_imu_csv(d / "rt.csv");
    REQUIRE(s.samples.size() == g.session.samples.size());
    for (std::size_t i = 0; i < s.samples.size(); i += 37) {
      CHECK(s.samples[i].t == g.session.samples[i].t);
      CHECK(s.samples[i].f.x == g.session.samples[i].f.x);
      CHECK(std::abs(s.samples[i].w.z - g.session.samples[i].w.z) < 1e-15);
    }
    const HeadingSeries gt = load_gt_csv(d / "rt_gt.csv");
    CHECK(gt.heading_deg == g.gt.heading_deg);
  }
  fs::remove_all(d);
}

TEST_CASE("format_double round-trips") {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(g);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("gyro calibration") {
  RecordingSession s;
  s.samples = still(200, 100.0, {0.001, -0.002, 0.005});
  const RecordingSession c = calibrate_gyro(s, 40);
  for (const ImuSample& x : c.samples) CHECK(std::abs(x.w.z) < 1e-12);

  RecordingSession z;
  z.samples = still(100, 100.0);
  const RecordingSession cz = calibrate_gyro(z);
  for (std::size_t i = 0; i < z.samples.size(); ++i) CHECK(cz.samples[i].w.z == z.samples[i].w.z);

  CHECK_THROWS_AS(calibrate_gyro(z, 0), InvalidArgument);
  CHECK_THROWS_AS(calibrate_gyro(z, 500), InvalidArgument);
}

TEST_CASE("calibration recovers a simulated bias within the noise") {
  sim::DoorScenario sc;
  sc.duration = 20;
  sc.events = {{5.0, 60.0, 1.5, 2.0, 1.5}};
  sim::SensorErrorModel e;
  e.gyro_bias = {1e-3, -2e-3, 5e-3};
  e.seed = 7;
  const sim::Generated g = sim::generate(sc, e, "bias");
  const AngularRate b = estimate_gyro_bias(g.session.samples, 40);
  const double sigma = e.gyro_noise_density * std::sqrt(sc.rate_hz) / std::sqrt(40.0);
  CHECK(std::abs(b.x - 1e-3) < 4 * sigma);
  CHECK(std::abs(b.y + 2e-3) < 4 * sigma);
  CHECK(std::abs(b.z - 5e-3) < 4 * sigma);

  // Idempotent up to the noise floor.
  const RecordingSession once = calibrate_gyro(g.session);
  const RecordingSession twice = calibrate_gyro(once);
  for (std::size_t i = 0; i < once.samples.size(); i += 101) {
    CHECK(std::abs(once.samples[i].w.z - twice.samples[i].w.z) < 1e-15);
  }
}

TEST_CASE("shut-period detection") {
  SUBCASE("all stationary") {
    const std::vector<ImuSample> s = still(600, 100.0);
    const std::vector<Interval> iv = detect_shut_periods(s);
    REQUIRE(iv.size() == 1);
    CHECK(iv[0].begin == 0);
    CHECK(iv[0].end == 600);
  }
  SUBCASE("continuous motion") {
    const std::vector<ImuSample> s = still(600, 100.0, {0, 0, 0.5});
    CHECK(detect_shut_periods(s).empty());
  }
  SUBCASE("open, pause, close") {
    sim::DoorScenario sc;
    sc.duration = 12;
    sc.events = {{1.0, 80.0, 1.5, 3.0, 1.5}};
    const sim::Generated g = sim::generate(sc, sim::SensorErrorModel::ideal(), "p");
    // Lead-in [0, 1], hold [2.5, 5.5], tail [7, 12]; the threshold trims
    // a little of each ramp.
    const std::vector<Interval> all = detect_shut_periods(g.session.samples, 0.05, 0.5);
    REQUIRE(all.size() == 3);
    CHECK(all[0].begin == 0);
    CHECK(all[1].t_begin <= 2.5 - 1.0 / 120.0);
    CHECK(all[1].t_begin > 2.2);
    CHECK(all[1].t_end >= 5.5 + 1.0 / 120.0);
    CHECK(all[1].t_end < 5.8);
    CHECK(all[2].end == g.session.samples.size());
    const std::vector<Interval> long_only = detect_shut_periods(g.session.samples, 0.05, 2.0);
    REQUIRE(long_only.size() == 2);
    CHECK(long_only[0] == all[1]);
    CHECK(long_only[1] == all[2]);
  }
  SUBCASE("matches a brute-force scan") {
    std::mt19937_64 g(4);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<ImuSample> s = still(300, 50.0);
      std::size_t i = 0;
      while (i < s.size()) {
        const std::size_t run = 1 + g() % 80;
        const bool moving = g() % 2;
        for (std::size_t k = i; k < std::min(s.size(), i + run); ++k) {
          s[k].w = {0, 0, moving ? 0.2 : 0.01};
        }
        i += run;
      }
      const double min_dur = 0.2 + (g() % 20) * 0.05;
      CHECK(detect_shut_periods(s, 0.05, min_dur) == scan(s, 0.05, min_dur));
    }
  }
}

TEST_CASE("shut interval selection drops open-door pauses") {
  std::vector<double> heading(100, 0.0);
  for (int i = 30; i < 60; ++i) heading[i] = 80.0;
  heading[75] = 2.0;
  for (int i = 76; i < 100; ++i) heading[i] = 3.0;
  const std::vector<Interval> stationary{{0, 20, 0, 1}, {35, 55, 2, 3}, {76, 100, 4, 5}};
  const std::vector<Interval> kept = select_shut_intervals(stationary, heading, 10.0);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].begin == 0);
  CHECK(kept[1].begin == 76);
}

TEST_CASE("zero-drift enforcement") {
  SUBCASE("final shut value pinned to zero") {
    std::vector<double> t, h;
    for (int i = 0; i <= 100; ++i) {
      t.push_back(i * 0.1);
      h.push_back(i < 80 ? i * 0.02875 : 2.3);
    }
    const HeadingSeries out = enforce_zero_drift(series(t, h), std::vector<Interval>{{80, 101, 8.0, 10.0}});
    CHECK(out.heading_deg.back() == 0.0);
    for (int i = 80; i <= 100; ++i) CHECK(out.heading_deg[i] == 0.0);
    CHECK(out.heading_deg[50] == h[50]);
  }
  SUBCASE("no shut intervals leaves input unchanged") {
    const HeadingSeries s = series({0, 1, 2}, {0.0, 1.0, 2.0});
    CHECK(enforce_zero_drift(s, {}).heading_deg == s.heading_deg);
  }
  SUBCASE("two shut periods with linear drift make a re-zeroed sawtooth") {
    std::vector<double> t, h;
    for (int i = 0; i < 60; ++i) {
      t.push_back(i);
      h.push_back(0.1 * i);
    }
    const std::vector<Interval> shut{{20, 25, 20, 24}, {40, 45, 40, 44}};
    const HeadingSeries out = enforce_zero_drift(series(t, h), shut);
    for (int i = 0; i < 20; ++i) CHECK(out.heading_deg[i] == doctest::Approx(0.1 * i));
    for (int i = 20; i < 25; ++i) CHECK(out.heading_deg[i] == 0.0);
    for (int i = 25; i < 40; ++i) CHECK(out.heading_deg[i] == doctest::Approx(0.1 * (i - 20)));
    for (int i = 40; i < 45; ++i) CHECK(out.heading_deg[i] == 0.0);
    CHECK(out.heading_deg[59] == doctest::Approx(0.1 * 19));
  }
  SUBCASE("overlapping intervals are rejected") {
    const HeadingSeries s = series({0, 1, 2, 3}, {0, 0, 0, 0});
    CHECK_THROWS_AS(enforce_zero_drift(s, std::vector<Interval>{{0, 3, 0, 2}, {2, 4, 2, 3}}), InvalidArgument);
  }
}

TEST_CASE("windowing") {
  RecordingSession s;
  s.samples = still(2400, 120.0);
  HeadingSeries flat;
  HeadingSeries ramp;
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    flat.push_back(s.samples[i].t, 12.0);
    ramp.push_back(s.samples[i].t, static_cast<double>(i));
  }
  const std::vector<WindowSample> w = make_windows(s, flat);
  CHECK(w.size() == 120);
  for (const WindowSample& x : w) {
    CHECK(x.target_deg == 0.0);
    CHECK(x.size() == 20);
  }
  for (const WindowSample& x : make_windows(s, ramp)) CHECK(x.target_deg == doctest::Approx(19.0).epsilon(1e-12));

  // Chained windows invert exactly.
  const std::vector<WindowSample> chained = make_windows(s, ramp, {20, 19});
  const std::vector<double> inc = window_targets(chained);
  const std::vector<double> ends = window_end_times(chained);
  const HeadingSeries back = reconstruct_heading(inc, 0.0, ends);
  for (std::size_t k = 0; k < back.size(); ++k) CHECK(back.heading_deg[k] == ramp.at(back.t[k]));

  CHECK_THROWS_AS(make_windows(s, flat, {20, 0}), InvalidArgument);
  HeadingSeries short_gt;
  short_gt.push_back(0.0, 0.0);
  short_gt.push_back(5.0, 0.0);
  CHECK_THROWS_AS(make_windows(s, short_gt), InvalidArgument);
}

TEST_CASE("heading reconstruction") {
  const HeadingSeries h = reconstruct_heading(std::vector<double>{1, 2, 3});
  CHECK(h.heading_deg == std::vector<double>{1, 3, 6});
  const HeadingSeries z = reconstruct_heading(std::vector<double>{0, 0, 0}, 4.0);
  CHECK(z.heading_deg == std::vector<double>{4, 4, 4});
}

TEST_CASE("train/validation split by experiment") {
  std::vector<WindowSample> ws;
  for (int e = 0; e < 10; ++e) {
    for (int k = 0; k < 5; ++k) {
      WindowSample w;
      w.experiment = "exp" + std::to_string(e);
      w.target_deg = e * 10 + k;
      ws.push_back(w);
    }
  }
  const Split a = split_train_val(ws, 0.2, 3);
  CHECK(a.val_experiments.size() == 2);
  CHECK(a.val.size() == 10);
  CHECK(a.train.size() == 40);
  const Split b = split_train_val(ws, 0.2, 3);
  CHECK(a.val_experiments == b.val_experiments);
  for (const WindowSample& w : a.train) {
    CHECK(std::find(a.val_experiments.begin(), a.val_experiments.end(), w.experiment) == a.val_experiments.end());
  }
  for (double f : {0.05, 0.15, 0.33, 0.5, 0.71, 0.9}) {
    const Split s = split_train_val(ws, f, 9);
    const double want = f * 10;
    CHECK(std::abs(static_cast<double>(s.val_experiments.size()) - want) <= 1.0);
  }
  CHECK_THROWS_AS(split_train_val(ws, 1.5, 1), InvalidArgument);
}

TEST_CASE("manifest loading and preprocessing") {
  const fs::path d = scratch_dir("manifest");
  sim::CorpusConfig c;
  c.n_sessions = 3;
  c.n_test_sessions = 1;
  c.session_duration = 60;
  c.min_events = c.max_events = 3;
  c.seed = 5;
  const Manifest m = sim::generate_corpus(c, d);
  const Manifest l = load_manifest(d / "manifest.json");
  CHECK(l.dataset_id == "sim-5");
  CHECK(l.sessions.size() == 3);
  CHECK(l.with_role(Role::test).size() == 1);
  CHECK(l.resolve("x.csv") == d / "x.csv");

  const PreparedSession p = prepare_session(l, l.sessions[0], {});
  CHECK(p.gt.size() == p.session.samples.size());
  REQUIRE(!p.shut.empty());
  for (const Interval& iv : p.shut) {
    for (std::size_t i = iv.begin; i < iv.end; ++i) CHECK(p.gt.heading_deg[i] == 0.0);
  }
  const Split split = training_windows(l, {}, 0.5, 1);
  CHECK(split.train.size() + split.val.size() > 0);
  CHECK(split.val_experiments.size() == 1);

  const PreparedSession t = prepare_session(l, l.sessions[2], {});
  const std::vector<WindowSample> ev = evaluation_windows(t, 20);
  for (std::size_t k = 1; k < ev.size(); ++k) CHECK(ev[k].t_first == ev[k - 1].t_last);

  nlohmann::json j;
  {
    std::ifstream in(d / "manifest.json");
    in >> j;
  }
  j["bogus"] = 1;
  write(d / "bad.json", j.dump());
  CHECK_THROWS_WITH_AS(load_manifest(d / "bad.json"), doctest::Contains("bogus"), FormatError);
  j.erase("bogus");
  j["sessions"][1]["id"] = j["sessions"][0]["id"];
  write(d / "dup.json", j.dump());
  CHECK_THROWS_AS(load_manifest(d / "dup.json"), FormatError);
  CHECK_THROWS_AS(load_manifest(d / "missing.json"), Error);
  fs::remove_all(d);
}

TEST_CASE("ground truth from a reference IMU") {
  const fs::path d = scratch_dir("refimu");
  sim::DoorScenario sc;
  sc.duration = 30;
  sc.events = {{6.0, 70.0, 2.5, 2.0, 2.5}, {18.0, 40.0, 2.0, 1.0, 2.0}};
  sim::SensorErrorModel e;
  e.seed = 2;
  e.gyro_bias = {0, 0, deg_to_rad(20.0 / 3600.0)};
  const sim::Generated g = sim::generate(sc, e, "s");
  sim::SensorErrorModel e2 = sim::SensorErrorModel::ideal();
  const sim::Generated ref = sim::generate(sc, e2, "r");
  write_imu_csv(d / "s_imu.csv", g.session.samples);
  write_imu_csv(d / "r_imu.csv", ref.session.samples);
  Manifest m;
  m.dataset_id = "ref";
  m.sessions = {{"s", Role::train, "s_imu.csv", std::nullopt, fs::path("r_imu.csv"), 40}};
  save_manifest(d / "manifest.json", m);
  const Manifest l = load_manifest(d / "manifest.json");
  const PreparedSession p = prepare_session(l, l.sessions[0], {});
  double worst = 0;
  for (std::size_t i = 0; i < p.gt.size(); ++i) worst = std::max(worst, std::abs(p.gt.heading_deg[i] - g.gt.at(p.gt.t[i])));
  CHECK(worst < 1.0);
  fs::remove_all(d);
}
