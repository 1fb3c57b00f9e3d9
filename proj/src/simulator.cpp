// SPDX-License-Identifier: Apache-2.0
#include "doorinet/simulator.hpp"

#include <cmath>
#include <sstream>

#include "doorinet/error.hpp"
#include "doorinet/nn/tensor.hpp"

namespace doorinet::sim {

namespace {

// Minimum-jerk blend s(tau) = 10 tau^3 - 15 tau^4 + 6 tau^5 and its
// derivatives with respect to tau.
struct Blend {
  double s, ds, dds;
};

Blend min_jerk(double tau) {
  const double t2 = tau * tau;
  const double t3 = t2 * tau;
  return {t3 * (10.0 - 15.0 * tau + 6.0 * t2), 30.0 * t2 * (1.0 - 2.0 * tau + t2),
          60.0 * tau * (1.0 - 3.0 * tau + 2.0 * t2)};
}

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw InvalidArgument(field + ": " + why);
}

}  // namespace

void DoorScenario::validate() const {
  if (!(lever_arm >= 0.0) || !std::isfinite(lever_arm)) bad("lever_arm", "must be >= 0");
  if (!(rate_hz > 0.0)) bad("rate_hz", "must be positive");
  if (!(duration > 0.0)) bad("duration", "must be positive");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const DoorEvent& e = events[i];
    const std::string f = "events[" + std::to_string(i) + "]";
    if (!(e.peak_deg > 0.0 && e.peak_deg < 180.0)) {
      std::ostringstream msg;
      msg << "peak angle " << e.peak_deg << " deg outside (0, 180)";
      bad(f + ".peak_deg", msg.str());
    }
    if (!(e.open_duration > 0.0)) bad(f + ".open_duration", "must be positive");
    if (!(e.close_duration > 0.0)) bad(f + ".close_duration", "must be positive");
    if (!(e.pause >= 0.0)) bad(f + ".pause", "must be >= 0");
    if (!(e.start >= 0.0) || e.end() > duration) bad(f, "does not fit inside the scenario duration");
    if (i > 0 && e.start < events[i - 1].end()) bad(f, "overlaps the previous event");
  }
}

void SensorErrorModel::validate() const {
  if (!(gyro_noise_density >= 0.0)) bad("gyro_noise_density", "must be >= 0");
  if (!(accel_noise_density >= 0.0)) bad("accel_noise_density", "must be >= 0");
}

ProfilePoint angle_profile(const DoorEvent& e, double t) {
  const double t_open_end = e.start + e.open_duration;
  const double t_close_start = t_open_end + e.pause;
  const double t_end = t_close_start + e.close_duration;
  if (t <= e.start || t >= t_end) return {};
  if (t < t_open_end) {
    const double T = e.open_duration;
    const Blend b = min_jerk((t - e.start) / T);
    return {e.peak_deg * b.s, e.peak_deg * b.ds / T, e.peak_deg * b.dds / (T * T)};
  }
  if (t <= t_close_start) return {e.peak_deg, 0.0, 0.0};
  const double T = e.close_duration;
  const Blend b = min_jerk((t - t_close_start) / T);
  return {e.peak_deg * (1.0 - b.s), -e.peak_deg * b.ds / T, -e.peak_deg * b.dds / (T * T)};
}

ProfilePoint scenario_profile(const DoorScenario& scenario, double t) {
  ProfilePoint p;
  for (const DoorEvent& e : scenario.events) {
    const ProfilePoint q = angle_profile(e, t);
    p.angle_deg += q.angle_deg;
    p.rate_deg_s += q.rate_deg_s;
    p.accel_deg_s2 += q.accel_deg_s2;
  }
  return p;
}

Generated generate(const DoorScenario& scenario, const SensorErrorModel& errors,
                   const std::string& id, double gt_rate_hz) {
  scenario.validate();
  errors.validate();
  if (gt_rate_hz < 0.0) bad("gt_rate_hz", "must be >= 0");
  Generated g;
  g.session.imu_id = id;
  g.session.rate_hz = scenario.rate_hz;
  const auto n = static_cast<std::size_t>(std::floor(scenario.duration * scenario.rate_hz)) + 1;
  g.session.samples.reserve(n);
  nn::Rng rng(errors.seed);
  const double sg = errors.gyro_noise_density * std::sqrt(scenario.rate_hz);
  const double sa = errors.accel_noise_density * std::sqrt(scenario.rate_hz);
  const double r = scenario.lever_arm;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / scenario.rate_hz;
    const ProfilePoint p = scenario_profile(scenario, t);
    const double rate = deg_to_rad(p.rate_deg_s);
    const double acc = deg_to_rad(p.accel_deg_s2);
    ImuSample s;
    s.t = t;
    s.w = {errors.gyro_bias.x, errors.gyro_bias.y, rate + errors.gyro_bias.z};
    s.f = {-r * rate * rate + errors.accel_bias.x, r * acc + errors.accel_bias.y,
           kGravity + errors.accel_bias.z};
    // Draw order is fixed: gyro x, y, z then accel x, y, z.
    const double nwx = rng.normal(), nwy = rng.normal(), nwz = rng.normal();
    const double nfx = rng.normal(), nfy = rng.normal(), nfz = rng.normal();
    s.w.x += sg * nwx;
    s.w.y += sg * nwy;
    s.w.z += sg * nwz;
    s.f.x += sa * nfx;
    s.f.y += sa * nfy;
    s.f.z += sa * nfz;
    g.session.samples.push_back(s);
    if (gt_rate_hz == 0.0) g.gt.push_back(t, p.angle_deg);
  }
  if (gt_rate_hz > 0.0) {
    const auto m = static_cast<std::size_t>(std::floor(scenario.duration * gt_rate_hz)) + 1;
    for (std::size_t i = 0; i < m; ++i) {
      const double t = static_cast<double>(i) / gt_rate_hz;
      g.gt.push_back(t, scenario_profile(scenario, t).angle_deg);
    }
  }
  g.session.gt = g.gt;
  return g;
}

std::string to_string(Speed s) {
  switch (s) {
    case Speed::slow: return "slow";
    case Speed::medium: return "medium";
    case Speed::fast: return "fast";
  }
  return "medium";
}

Speed speed_from_string(const std::string& s) {
  if (s == "slow") return Speed::slow;
  if (s == "medium") return Speed::medium;
  if (s == "fast") return Speed::fast;
  throw InvalidArgument("unknown speed '" + s + "' (expected slow, medium or fast)");
}

double nominal_swing_duration(Speed s) {
  switch (s) {
    case Speed::slow: return 2.5;
    case Speed::medium: return 1.5;
    case Speed::fast: return 0.8;
  }
  return 1.5;
}

void CorpusConfig::validate() const {
  if (n_sessions == 0) bad("n_sessions", "must be >= 1");
  if (n_test_sessions >= n_sessions && n_sessions > 1) bad("n_test_sessions", "must leave a training session");
  if (angles_deg.empty()) bad("angles_deg", "must not be empty");
  for (std::size_t i = 0; i < angles_deg.size(); ++i) {
    if (!(angles_deg[i] > 0.0 && angles_deg[i] < 180.0)) {
      std::ostringstream msg;
      msg << angles_deg[i] << " deg outside (0, 180)";
      bad("angles_deg[" + std::to_string(i) + "]", msg.str());
    }
  }
  if (speeds.empty()) bad("speeds", "must not be empty");
  if (min_events == 0 || max_events < min_events) bad("min_events", "need 1 <= min_events <= max_events");
  if (session_duration < 0.0) bad("session_duration", "must be >= 0");
  if (test_session_duration < 0.0) bad("test_session_duration", "must be >= 0");
  if (total_duration < 0.0) bad("total_duration", "must be >= 0");
  if (!(lead_in >= 0.0)) bad("lead_in", "must be >= 0");
  if (!(min_shut_pause >= 0.0 && max_shut_pause >= min_shut_pause)) bad("min_shut_pause", "invalid range");
  if (!(min_open_pause >= 0.0 && max_open_pause >= min_open_pause)) bad("min_open_pause", "invalid range");
  if (!(min_lever_arm >= 0.0 && max_lever_arm >= min_lever_arm)) bad("min_lever_arm", "invalid range");
  if (!(max_gyro_bias_deg_h >= 0.0)) bad("max_gyro_bias_deg_h", "must be >= 0");
  if (!(min_gyro_bias_fraction >= 0.0 && min_gyro_bias_fraction <= 1.0)) {
    bad("min_gyro_bias_fraction", "must lie in [0, 1]");
  }
  if (!(max_accel_bias >= 0.0)) bad("max_accel_bias", "must be >= 0");
  if (!(gyro_noise_density >= 0.0)) bad("gyro_noise_density", "must be >= 0");
  if (!(accel_noise_density >= 0.0)) bad("accel_noise_density", "must be >= 0");
  if (!(rate_hz > 0.0)) bad("rate_hz", "must be positive");
  if (!(gt_rate_hz >= 0.0)) bad("gt_rate_hz", "must be >= 0");
}

namespace {

std::string session_id(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "s" + digits;
}

bool is_test(const CorpusConfig& c, std::size_t index) {
  return index + c.n_test_sessions >= c.n_sessions && c.n_sessions > 1;
}

}  // namespace

std::pair<DoorScenario, SensorErrorModel> corpus_session(const CorpusConfig& c, std::size_t index) {
  c.validate();
  nn::Rng rng = nn::Rng::derive(c.seed, index);
  DoorScenario sc;
  sc.rate_hz = c.rate_hz;
  sc.lever_arm = rng.uniform(c.min_lever_arm, c.max_lever_arm);

  SensorErrorModel em;
  auto gyro_bias = [&]() {
    const double mag = rng.uniform(c.min_gyro_bias_fraction, 1.0) * c.max_gyro_bias_deg_h;
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return deg_to_rad(sign * mag / 3600.0);
  };
  em.gyro_bias.x = gyro_bias();
  em.gyro_bias.y = gyro_bias();
  em.gyro_bias.z = gyro_bias();
  em.accel_bias = {rng.uniform(-c.max_accel_bias, c.max_accel_bias),
                   rng.uniform(-c.max_accel_bias, c.max_accel_bias),
                   rng.uniform(-c.max_accel_bias, c.max_accel_bias)};
  em.gyro_noise_density = c.gyro_noise_density;
  em.accel_noise_density = c.accel_noise_density;
  em.seed = nn::Rng::derive(c.seed, index, 1).next();

  const bool test = is_test(c, index);
  const std::size_t n_train = c.n_sessions - (c.n_sessions > 1 ? c.n_test_sessions : 0);
  double target = c.session_duration;
  if (test && c.test_session_duration > 0.0) {
    target = c.test_session_duration;
  } else if (!test && c.total_duration > 0.0) {
    target = c.total_duration / static_cast<double>(n_train);
  }
  const std::size_t n_events =
      c.min_events + static_cast<std::size_t>(rng.below(c.max_events - c.min_events + 1));

  auto swing = [&](Speed s, double angle) {
    return nominal_swing_duration(s) * std::sqrt(angle / 90.0) * rng.uniform(0.85, 1.15);
  };
  double t = c.lead_in;
  for (std::size_t k = 0;; ++k) {
    DoorEvent e;
    e.start = t;
    e.peak_deg = c.angles_deg[rng.below(c.angles_deg.size())];
    e.open_duration = swing(c.speeds[rng.below(c.speeds.size())], e.peak_deg);
    e.pause = rng.uniform(c.min_open_pause, c.max_open_pause);
    e.close_duration = swing(c.speeds[rng.below(c.speeds.size())], e.peak_deg);
    const double shut = rng.uniform(c.min_shut_pause, c.max_shut_pause);
    if (target > 0.0 ? e.end() + shut > target : k >= n_events) break;
    sc.events.push_back(e);
    t = e.end() + shut;
  }
  sc.duration = target > 0.0 ? target : t;
  return {sc, em};
}

Manifest generate_corpus(const CorpusConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw Error("cannot create output directory '" + out_dir.string() + "'");
  }
  Manifest m;
  m.dataset_id = config.dataset_id.empty() ? "sim-" + std::to_string(config.seed) : config.dataset_id;
  m.rate_hz = config.rate_hz;
  m.base_dir = out_dir;
  m.sessions.resize(config.n_sessions);
  std::vector<std::string> failures(config.n_sessions);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(config.n_sessions); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      const auto [scenario, errors] = corpus_session(config, idx);
      const std::string id = session_id(idx);
      const Generated g = generate(scenario, errors, id, config.gt_rate_hz);
      SessionEntry& e = m.sessions[idx];
      e.id = id;
      e.role = is_test(config, idx) ? Role::test : Role::train;
      e.imu_file = id + "_imu.csv";
      e.gt_file = id + "_gt.csv";
      write_imu_csv(out_dir / e.imu_file, g.session.samples);
      write_gt_csv(out_dir / *e.gt_file, g.gt);
    } catch (const std::exception& ex) {
      failures[idx] = ex.what();
    }
  }
  for (const std::string& f : failures) {
    if (!f.empty()) throw Error("generate_corpus: " + f);
  }
  save_manifest(out_dir / "manifest.json", m);
  return m;
}

}  // namespace doorinet::sim
