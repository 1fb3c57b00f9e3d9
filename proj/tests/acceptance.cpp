// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL/SKIP line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "doorinet/app/commands.hpp"
#include "doorinet/app/config.hpp"
#include "doorinet/error.hpp"
#include "doorinet/madgwick.hpp"
#include "doorinet/metrics.hpp"
#include "doorinet/nn/loss.hpp"
#include "doorinet/simulator.hpp"
#include "support/oracles.hpp"

using namespace doorinet;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::fail;
  std::string detail;
};

struct Options {
  fs::path work_dir;
  int c6_epochs = 12;
  std::string real_report;
  std::set<int> allow_fail;
  std::set<int> only;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome verdict(bool ok, std::string detail) {
  return {ok ? Status::pass : Status::fail, std::move(detail)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 1: analytic gradients against central differences on shrunk models.
Outcome gradient_correctness(const Options&) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_name;
  bool live = true;
  for (const auto& [tag, arch] : {std::pair{"G", oracle::shrunk_g()}, std::pair{"AG", oracle::shrunk_ag()}}) {
    for (const oracle::GroupError& g : oracle::gradient_check(arch, 7, 1e-5)) {
      live = live && g.grad_scale > 0.0;
      if (g.max_rel > worst) {
        worst = g.max_rel;
        worst_name = std::string(tag) + ":" + g.name;
      }
    }
  }
  const double secs = seconds_since(t0);
  return verdict(worst < 1e-4 && live && secs < 60.0,
                 fmt("max rel error %.2e (%s), %.1f s", worst, worst_name.c_str(), secs));
}

// 2: bigru_forward against the unrolled oracle.
Outcome gru_equivalence(const Options&) {
  std::mt19937_64 g(2);
  std::normal_distribution<double> n;
  double worst = 0.0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t in = 1 + g() % 6, len = 1 + g() % 24, layers = 1 + g() % 3;
    std::vector<nn::BiGruLayerParams> stack;
    std::size_t width = in;
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t h = 1 + g() % 8;
      stack.push_back({oracle::random_gru(width, h, g()), oracle::random_gru(width, h, g())});
      width = 2 * h;
    }
    oracle::Seq xs(len, std::vector<double>(in));
    std::vector<nn::Vector<double>> xv;
    for (auto& x : xs) {
      for (double& v : x) v = n(g);
      xv.push_back(Eigen::Map<const nn::Vector<double>>(x.data(), static_cast<nn::Index>(in)));
    }
    const oracle::Seq want = oracle::bigru(stack, xs);
    const std::vector<nn::Vector<double>> got = nn::bigru_forward(stack, xv);
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t i = 0; i < want[t].size(); ++i) {
        worst = std::max(worst, std::abs(got[t](static_cast<nn::Index>(i)) - want[t][i]));
      }
    }
  }
  return verdict(worst < 1e-12, fmt("%d shapes, max abs difference %.2e", trials, worst));
}

// 3: Huber branch values and smoothness at the knee.
Outcome huber_branches(const Options&) {
  const double a = nn::huber_loss(std::vector<double>{0.0}, std::vector<double>{0.5});
  const double b = nn::huber_loss(std::vector<double>{0.0}, std::vector<double>{2.0});
  const double jump = std::abs(nn::huber_derivative(0.0, 1.0 - 1e-12) - nn::huber_derivative(0.0, 1.0 + 1e-12));
  return verdict(a == 0.125 && b == 1.5 && jump < 1e-9,
                 fmt("L(0.5)=%.17g L(2)=%.17g derivative jump at 1: %.2e", a, b, jump));
}

// 4: baselines on a noiseless 90 degree open/close at 120 Hz.
Outcome filter_fidelity(const Options&) {
  sim::DoorScenario sc;
  sc.duration = 60;
  sc.events = {{5.0, 90.0, 2.0, 3.0, 2.0}, {25.0, 90.0, 1.5, 4.0, 1.5}, {45.0, 90.0, 2.5, 2.0, 2.5}};
  const sim::Generated g = sim::generate(sc, sim::SensorErrorModel::ideal());
  const HeadingSeries integ = integrate_gyro(g.session.samples, 0.0);
  double se = 0.0;
  for (std::size_t i = 0; i < integ.size(); ++i) se += std::pow(integ.heading_deg[i] - g.gt.heading_deg[i], 2);
  const double integ_rmse = std::sqrt(se / static_cast<double>(integ.size()));

  madgwick::Config k0;
  k0.k_init = k0.k_norm = 0.0;
  k0.sample_period = 1.0 / sc.rate_hz;
  const HeadingSeries filt = madgwick::run(g.session.samples, k0);
  double gap = 0.0;
  for (std::size_t i = 0; i < filt.size(); ++i) gap = std::max(gap, std::abs(filt.heading_deg[i] - integ.heading_deg[i]));

  madgwick::Config th;
  th.sample_period = 1.0 / sc.rate_hz;
  th.stationary_threshold = 0.05;
  const HeadingSeries held = madgwick::run_thresholded(g.session.samples, th);
  bool constant = true;
  std::size_t pause_points = 0;
  for (const sim::DoorEvent& e : sc.events) {
    const double a = e.start + e.open_duration, b = a + e.pause;
    std::optional<double> first;
    for (std::size_t i = 0; i < held.size(); ++i) {
      if (held.t[i] < a || held.t[i] > b) continue;
      ++pause_points;
      if (!first) first = held.heading_deg[i];
      constant = constant && held.heading_deg[i] == *first;
    }
  }
  return verdict(integ_rmse < 0.01 && gap < 0.02 && constant && pause_points > 0,
                 fmt("integration RMSE %.2e deg, |K=0 filter - integration| <= %.2e deg, "
                     "thresholded constant over %zu pause samples: %s",
                     integ_rmse, gap, pause_points, constant ? "yes" : "no"));
}

// 5: stationary 90 min with a 10 deg/h z bias drifts 15 deg.
Outcome bias_drift(const Options&) {
  sim::DoorScenario sc;
  sc.duration = 90 * 60;
  sim::SensorErrorModel clean = sim::SensorErrorModel::ideal();
  clean.gyro_bias = {0, 0, deg_to_rad(10.0 / 3600.0)};
  const double exact = integrate_gyro(sim::generate(sc, clean).session.samples, 0.0).heading_deg.back();

  // With sensor noise the endpoint also carries an angle random walk, so the
  // mean over independent noise seeds is what the closed form predicts.
  const int seeds = 16;
  double mean = 0.0, spread = 0.0;
  for (int s = 0; s < seeds; ++s) {
    sim::SensorErrorModel noisy;
    noisy.gyro_bias = clean.gyro_bias;
    noisy.seed = 100 + static_cast<std::uint64_t>(s);
    const double d = integrate_gyro(sim::generate(sc, noisy).session.samples, 0.0).heading_deg.back();
    mean += d / seeds;
    spread = std::max(spread, std::abs(d - 15.0));
  }
  return verdict(std::abs(exact - 15.0) < 0.5 && std::abs(mean - 15.0) < 0.5,
                 fmt("noise-free drift %.4f deg, mean over %d noisy seeds %.3f deg (max deviation %.2f)",
                     exact, seeds, mean, spread));
}

double pooled_rmse(const MetricsReport& r, const std::string& estimator) {
  for (const MetricsRow& row : r.rows) {
    if (row.estimator == estimator && row.session == "all") return row.rmse_deg;
  }
  throw doorinet::Error("report has no pooled row for " + estimator);
}

// 6: desk-scale training on synthetic data.
Outcome end_to_end(const Options& o) {
  const auto t0 = Clock::now();
  const fs::path root = o.work_dir / "c6";
  fs::remove_all(root);
  std::ostringstream log;

  const app::SimulateConfig sim = app::parse_simulate(json{{"n_sessions", 14},
                                                           {"n_test_sessions", 2},
                                                           {"total_duration", 3600},
                                                           {"test_session_duration", 600},
                                                           {"max_gyro_bias_deg_h", 50},
                                                           {"seed", 2024},
                                                           {"out_dir", (root / "data").string()}});
  app::run_simulate(sim, log);
  const fs::path manifest = root / "data" / "manifest.json";

  auto train = [&](const std::string& model) {
    const app::TrainRunConfig c = app::parse_train(json{
        {"manifest", manifest.string()},
        {"model", model},
        {"scale_divisor", 2},
        {"precision", "f32"},
        {"train", {{"epochs", o.c6_epochs}, {"initial_lr", 3e-3}, {"batch_size", 16}, {"seed", 1}}},
        {"out_dir", (root / model).string()}});
    const auto t = Clock::now();
    const app::TrainOutcome out = app::run_train(c, std::cout);
    std::cout << "  " << app::model_name(model) << ": " << out.history.size() << " epochs, final val loss "
              << out.history.back().val_loss << ", " << fmt("%.0f s", seconds_since(t)) << std::endl;
    return out.checkpoint;
  };
  const fs::path ag = train("ag");
  const fs::path g = train("g");

  app::EvalConfig ec = app::parse_eval(json{{"manifest", manifest.string()},
                                            {"out_dir", (root / "eval").string()}});
  ec.checkpoints = {ag, g};
  const MetricsReport r = app::run_eval(ec, log);
  const double r_ag = pooled_rmse(r, app::model_name("ag"));
  const double r_g = pooled_rmse(r, app::model_name("g"));
  const double r_int = pooled_rmse(r, "gyro-integration");
  const double secs = seconds_since(t0);
  std::cout << format_table(r.rows);
  return verdict(r_ag * 3.0 <= r_int && r_ag <= r_g + 0.5 && secs <= 1800.0,
                 fmt("RMSE AG %.2f deg, G %.2f deg, integration %.2f deg (need AG <= %.2f and "
                     "AG <= G + 0.5), %.0f s",
                     r_ag, r_g, r_int, r_int / 3.0, secs));
}

// 7: metrics against brute-force oracles.
Outcome metric_oracles(const Options&) {
  std::mt19937_64 g(7);
  std::normal_distribution<double> n(0.0, 3.0);
  int mismatches = 0, order_violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 1 + g() % 100;
    std::vector<double> y(len), yh(len);
    for (std::size_t i = 0; i < len; ++i) {
      y[i] = n(g);
      yh[i] = y[i] + 0.5 * n(g);
    }
    if (rmse(y, yh) != oracle::rmse(y, yh) || lpd(y, yh) != oracle::lpd(y, yh) ||
        mad(y, yh) != oracle::mad(y, yh)) {
      ++mismatches;
    }
    if (mad(y, yh) < lpd(y, yh)) ++order_violations;
  }
  return verdict(mismatches == 0 && order_violations == 0,
                 fmt("1000 instances: %d mismatches, %d with mad < lpd", mismatches, order_violations));
}

// 8: repeated runs give identical bytes.
Outcome determinism(const Options& o) {
  std::vector<std::string> ckpt, report, corpus;
  for (int run = 0; run < 2; ++run) {
    const fs::path root = o.work_dir / ("c8_" + std::to_string(run));
    fs::remove_all(root);
    std::ostringstream log;
    app::run_simulate(app::parse_simulate(json{{"n_sessions", 4},
                                               {"n_test_sessions", 1},
                                               {"session_duration", 60},
                                               {"seed", 8},
                                               {"out_dir", (root / "data").string()}}),
                      log);
    const fs::path manifest = root / "data" / "manifest.json";
    const app::TrainOutcome t = app::run_train(
        app::parse_train(json{{"manifest", manifest.string()},
                              {"model", "ag"},
                              {"scale_divisor", 8},
                              {"train", {{"epochs", 3}, {"batch_size", 16}, {"seed", 3}}},
                              {"out_dir", (root / "model").string()}}),
        log);
    app::EvalConfig ec = app::parse_eval(json{{"manifest", manifest.string()},
                                              {"out_dir", (root / "eval").string()}});
    ec.checkpoints = {t.checkpoint};
    app::run_eval(ec, log);
    ckpt.push_back(slurp(t.checkpoint));
    report.push_back(slurp(root / "eval" / "report.json"));
    corpus.push_back(slurp(root / "data" / "s000_imu.csv"));
  }
  const bool ok = !ckpt[0].empty() && ckpt[0] == ckpt[1] && report[0] == report[1] && corpus[0] == corpus[1];
  return verdict(ok, fmt("checkpoint %zu bytes identical: %s, report identical: %s, corpus identical: %s",
                         ckpt[0].size(), ckpt[0] == ckpt[1] ? "yes" : "no",
                         report[0] == report[1] ? "yes" : "no", corpus[0] == corpus[1] ? "yes" : "no"));
}

// 9: optional check on a report from a recorded dataset.
Outcome recorded_dataset(const Options& o) {
  if (o.real_report.empty()) return {Status::skip, "no recorded-dataset report given (--real-report)"};
  const MetricsReport r = load_report(o.real_report);
  auto find = [&](const std::string& est) {
    double v = -1.0;
    for (const MetricsRow& row : r.rows) {
      if (row.estimator != est) continue;
      if (row.session == "all" || v < 0.0) v = row.rmse_deg;
    }
    if (v < 0.0) throw doorinet::Error("report has no row for " + est);
    return v;
  };
  const double ag = find(app::model_name("ag"));
  const double mg = find("madgwick");
  const double in = find("gyro-integration");
  return verdict(ag < 5.0 && ag * 5.0 <= mg && ag * 5.0 <= in,
                 fmt("RMSE AG %.2f deg, madgwick %.2f deg, integration %.2f deg", ag, mg, in));
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  std::string allow, only, work = (fs::temp_directory_path() / "doorinet_acceptance").string();
  CLI::App cli{"Acceptance criteria"};
  cli.add_option("--work-dir", work, "Scratch directory");
  cli.add_option("--c6-epochs", o.c6_epochs, "Epochs per model for criterion 6")->check(CLI::Range(1, 150));
  cli.add_option("--real-report", o.real_report, "report.json from a recorded dataset (criterion 9)");
  cli.add_option("--allow-fail", allow, "Comma-separated criteria whose failure does not fail the run");
  cli.add_option("--only", only, "Comma-separated criteria to run");
  CLI11_PARSE(cli, argc, argv);
  o.work_dir = work;
  o.allow_fail = parse_list(allow);
  o.only = parse_list(only);
  fs::create_directories(o.work_dir);

  const std::vector<std::pair<std::string, std::function<Outcome(const Options&)>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"GRU oracle equivalence", gru_equivalence},
      {"Huber branch values", huber_branches},
      {"filter baseline fidelity", filter_fidelity},
      {"bias-drift closed form", bias_drift},
      {"end-to-end learning", end_to_end},
      {"metric oracles", metric_oracles},
      {"determinism", determinism},
      {"recorded dataset", recorded_dataset},
  };
  int gating_failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!o.only.empty() && !o.only.contains(id)) continue;
    Outcome out;
    try {
      out = criteria[i].second(o);
    } catch (const std::exception& e) {
      out = {Status::fail, std::string("error: ") + e.what()};
    }
    const char* tag = out.status == Status::pass ? "PASS" : out.status == Status::skip ? "SKIP" : "FAIL";
    std::cout << "criterion " << id << " " << tag << ": " << criteria[i].first << ": " << out.detail;
    if (out.status == Status::fail && o.allow_fail.contains(id)) {
      std::cout << " (allowed)";
    } else if (out.status == Status::fail) {
      ++gating_failures;
    }
    std::cout << std::endl;
  }
  return gating_failures == 0 ? 0 : 1;
}
