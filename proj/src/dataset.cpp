// SPDX-License-Identifier: Apache-2.0
#include "doorinet/dataset.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

#include "doorinet/error.hpp"

namespace doorinet {

using nlohmann::json;

std::string to_string(Role r) {
  switch (r) {
    case Role::train: return "train";
    case Role::val: return "val";
    case Role::test: return "test";
  }
  return "train";
}

Role role_from_string(const std::string& s) {
  if (s == "train") return Role::train;
  if (s == "val") return Role::val;
  if (s == "test") return Role::test;
  throw InvalidArgument("unknown role '" + s + "' (expected train, val or test)");
}

std::filesystem::path Manifest::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : base_dir / p;
}

std::vector<const SessionEntry*> Manifest::with_role(Role r) const {
  std::vector<const SessionEntry*> out;
  for (const SessionEntry& e : sessions) {
    if (e.role == r) out.push_back(&e);
  }
  return out;
}

namespace {

void check_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw FormatError(where + ": expected an object");
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) throw FormatError(where + ": unknown key '" + item.key() + "'");
  }
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest '" + path.string() + "'");
  const std::string where = path.string();
  Manifest m;
  m.base_dir = path.parent_path();
  try {
    const json j = json::parse(in);
    check_keys(j, {"schema_version", "dataset_id", "rate_hz", "preprocessed", "sessions"}, where);
    const int version = j.at("schema_version").get<int>();
    if (version != Manifest::kSchemaVersion) {
      throw FormatError(where + ": schema_version " + std::to_string(version) + " is not supported");
    }
    m.dataset_id = j.at("dataset_id").get<std::string>();
    m.rate_hz = j.value("rate_hz", 120.0);
    m.preprocessed = j.value("preprocessed", false);
    std::set<std::string> ids;
    for (const json& s : j.at("sessions")) {
      check_keys(s, {"id", "role", "imu_file", "gt_file", "gt_imu_file", "calibration_window"},
                 where + ": sessions[]");
      SessionEntry e;
      e.id = s.at("id").get<std::string>();
      if (!ids.insert(e.id).second) throw FormatError(where + ": duplicate session id '" + e.id + "'");
      e.role = role_from_string(s.at("role").get<std::string>());
      e.imu_file = s.at("imu_file").get<std::string>();
      if (s.contains("gt_file")) e.gt_file = s.at("gt_file").get<std::string>();
      if (s.contains("gt_imu_file")) e.gt_imu_file = s.at("gt_imu_file").get<std::string>();
      e.calibration_window = s.value("calibration_window", std::size_t{40});
      if (!e.gt_file && !e.gt_imu_file) {
        throw FormatError(where + ": session '" + e.id + "' has neither gt_file nor gt_imu_file");
      }
      m.sessions.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw FormatError(where + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(where + ": " + e.what());
  }
  if (m.sessions.empty()) throw FormatError(where + ": no sessions listed");
  return m;
}

void save_manifest(const std::filesystem::path& path, const Manifest& m) {
  json sessions = json::array();
  for (const SessionEntry& e : m.sessions) {
    json s = {{"id", e.id},
              {"role", to_string(e.role)},
              {"imu_file", e.imu_file.generic_string()},
              {"calibration_window", e.calibration_window}};
    if (e.gt_file) s["gt_file"] = e.gt_file->generic_string();
    if (e.gt_imu_file) s["gt_imu_file"] = e.gt_imu_file->generic_string();
    sessions.push_back(std::move(s));
  }
  const json j = {{"schema_version", Manifest::kSchemaVersion},
                  {"dataset_id", m.dataset_id},
                  {"rate_hz", m.rate_hz},
                  {"preprocessed", m.preprocessed},
                  {"sessions", sessions}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

PreparedSession prepare_session(const Manifest& manifest, const SessionEntry& entry,
                                const PreprocessOptions& options) {
  PreparedSession p;
  p.entry = entry;
  p.session = load_imu_csv(manifest.resolve(entry.imu_file), entry.id);
  const bool calibrate = !manifest.preprocessed &&
                         (entry.role != Role::test || options.calibrate_test);
  if (calibrate) p.session = calibrate_gyro(p.session, entry.calibration_window);

  HeadingSeries gt;
  if (entry.gt_file) {
    gt = load_gt_csv(manifest.resolve(*entry.gt_file));
  } else {
    RecordingSession ref = load_imu_csv(manifest.resolve(*entry.gt_imu_file), entry.id + ".gt");
    ref = calibrate_gyro(ref, entry.calibration_window);
    madgwick::Config cfg = options.gt_filter;
    if (ref.rate_hz > 0.0) cfg.sample_period = 1.0 / ref.rate_hz;
    gt = madgwick::run_thresholded(ref.samples, cfg);
  }
  gt.validate();

  HeadingSeries on_sensor;
  on_sensor.t.reserve(p.session.samples.size());
  on_sensor.heading_deg.reserve(p.session.samples.size());
  for (const ImuSample& s : p.session.samples) on_sensor.push_back(s.t, gt.at(s.t));
  if (manifest.preprocessed) {
    p.gt = std::move(on_sensor);
    return p;
  }
  const std::vector<Interval> stationary =
      detect_shut_periods(p.session.samples, options.shut_threshold, options.shut_min_duration);
  p.shut = select_shut_intervals(stationary, on_sensor.heading_deg, options.shut_tolerance_deg);
  p.gt = enforce_zero_drift(on_sensor, p.shut);
  p.session.gt = p.gt;
  return p;
}

Split training_windows(const Manifest& manifest, const PreprocessOptions& options,
                       double val_fraction, std::uint64_t seed) {
  const WindowOptions wopt{options.window_len, options.train_stride};
  std::vector<WindowSample> train, val;
  for (const SessionEntry& e : manifest.sessions) {
    if (e.role == Role::test) continue;
    const PreparedSession p = prepare_session(manifest, e, options);
    std::vector<WindowSample> w = make_windows(p.session, p.gt, wopt, e.id);
    auto& dst = e.role == Role::val ? val : train;
    dst.insert(dst.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  if (!val.empty()) {
    Split s;
    s.train = std::move(train);
    s.val = std::move(val);
    for (const SessionEntry* e : manifest.with_role(Role::val)) s.val_experiments.push_back(e->id);
    return s;
  }
  return split_train_val(train, val_fraction, seed);
}

std::vector<WindowSample> evaluation_windows(const PreparedSession& prepared,
                                             std::size_t window_len) {
  return make_windows(prepared.session, prepared.gt, {window_len, window_len - 1},
                      prepared.entry.id);
}

}  // namespace doorinet
