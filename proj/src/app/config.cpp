// SPDX-License-Identifier: Apache-2.0
#include "doorinet/app/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "doorinet/error.hpp"

namespace doorinet::app {

using nlohmann::json;

namespace {

template <class T>
struct is_optional : std::false_type {};
template <class T>
struct is_optional<std::optional<T>> : std::true_type {};

// Walks one JSON object, converting the keys it is asked for and
// remembering them so leftovers can be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) throw InvalidArgument(label() + "expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    used_.insert(key);
    if (!j_->contains(key)) return;
    try {
      if constexpr (is_optional<T>::value) {
        const json& v = j_->at(key);
        if (v.is_null()) {
          out.reset();
        } else {
          out = v.get<typename T::value_type>();
        }
      } else {
        out = j_->at(key).get<T>();
      }
    } catch (const json::exception&) {
      throw InvalidArgument(field(key) + ": wrong type");
    }
  }

  void get_path(const char* key, std::filesystem::path& out) {
    std::string s;
    if (!j_->contains(key)) {
      used_.insert(key);
      return;
    }
    get(key, s);
    out = s;
  }

  bool has(const char* key) const { return j_->contains(key); }

  Reader child(const char* key) {
    used_.insert(key);
    return Reader(j_->at(key), field(key));
  }

  const json& raw(const char* key) {
    used_.insert(key);
    return j_->at(key);
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_->items()) {
      if (!used_.contains(item.key())) {
        throw InvalidArgument(label() + "unknown key '" + field(item.key().c_str()) + "'");
      }
    }
  }

 private:
  std::string label() const { return path_.empty() ? std::string("config: ") : path_ + ": "; }

  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

// Runs a validate() and prefixes its message with the config section.
template <class F>
void validated(const std::string& section, F&& check) {
  try {
    check();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(section.empty() ? e.what() : section + "." + e.what());
  }
}

madgwick::Config read_filter(Reader r) {
  madgwick::Config c;
  r.get("k_init", c.k_init);
  r.get("k_norm", c.k_norm);
  r.get("t_init", c.t_init);
  r.get("sample_period", c.sample_period);
  if (r.has("stationary_threshold")) {
    const json& v = r.raw("stationary_threshold");
    if (v.is_null()) {
      c.stationary_threshold.reset();
    } else if (v.is_number()) {
      c.stationary_threshold = v.get<double>();
    } else {
      throw InvalidArgument(r.field("stationary_threshold") + ": wrong type");
    }
  } else {
    r.get("stationary_threshold", c.stationary_threshold);
  }
  std::string ref = c.reference == madgwick::GravityReference::standard ? "standard" : "y_column";
  r.get("reference", ref);
  if (ref == "standard") {
    c.reference = madgwick::GravityReference::standard;
  } else if (ref == "y_column") {
    c.reference = madgwick::GravityReference::y_column;
  } else {
    throw InvalidArgument(r.field("reference") + ": expected 'standard' or 'y_column'");
  }
  r.finish();
  validated("", [&] { c.validate(); });
  return c;
}

PreprocessOptions read_preprocess(Reader r) {
  PreprocessOptions o;
  r.get("window_len", o.window_len);
  r.get("train_stride", o.train_stride);
  r.get("shut_threshold", o.shut_threshold);
  r.get("shut_min_duration", o.shut_min_duration);
  r.get("shut_tolerance_deg", o.shut_tolerance_deg);
  r.get("calibrate_test", o.calibrate_test);
  if (r.has("gt_filter")) o.gt_filter = read_filter(r.child("gt_filter"));
  r.finish();
  if (o.window_len < 2) throw InvalidArgument(r.field("window_len") + ": must be >= 2");
  if (o.train_stride == 0) throw InvalidArgument(r.field("train_stride") + ": must be positive");
  return o;
}

nn::TrainConfig read_train(Reader r) {
  nn::TrainConfig c;
  r.get("epochs", c.epochs);
  r.get("initial_lr", c.initial_lr);
  r.get("lr_factor", c.lr_factor);
  r.get("plateau_patience", c.plateau_patience);
  r.get("plateau_threshold", c.plateau_threshold);
  r.get("weight_decay", c.weight_decay);
  r.get("batch_size", c.batch_size);
  r.get("seed", c.seed);
  r.get("dropout_p", c.dropout_p);
  r.get("micro_batch", c.micro_batch);
  r.finish();
  return c;
}

}  // namespace

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("DOORINET_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return "doorinet-data";
}

SimulateConfig parse_simulate(const json& j) {
  Reader r(j, "");
  SimulateConfig c;
  sim::CorpusConfig& k = c.corpus;
  r.get_path("out_dir", c.out_dir);
  r.get("n_sessions", k.n_sessions);
  r.get("n_test_sessions", k.n_test_sessions);
  r.get("angles_deg", k.angles_deg);
  if (r.has("speeds")) {
    std::vector<std::string> names;
    r.get("speeds", names);
    k.speeds.clear();
    for (const std::string& s : names) {
      try {
        k.speeds.push_back(sim::speed_from_string(s));
      } catch (const InvalidArgument& e) {
        throw InvalidArgument(std::string("speeds: ") + e.what());
      }
    }
  }
  r.get("min_events", k.min_events);
  r.get("max_events", k.max_events);
  r.get("session_duration", k.session_duration);
  r.get("test_session_duration", k.test_session_duration);
  r.get("total_duration", k.total_duration);
  r.get("lead_in", k.lead_in);
  r.get("min_shut_pause", k.min_shut_pause);
  r.get("max_shut_pause", k.max_shut_pause);
  r.get("min_open_pause", k.min_open_pause);
  r.get("max_open_pause", k.max_open_pause);
  r.get("min_lever_arm", k.min_lever_arm);
  r.get("max_lever_arm", k.max_lever_arm);
  r.get("max_gyro_bias_deg_h", k.max_gyro_bias_deg_h);
  r.get("min_gyro_bias_fraction", k.min_gyro_bias_fraction);
  r.get("max_accel_bias", k.max_accel_bias);
  double gyro_density_deg = rad_to_deg(k.gyro_noise_density);
  r.get("gyro_noise_density_deg", gyro_density_deg);
  k.gyro_noise_density = deg_to_rad(gyro_density_deg);
  r.get("accel_noise_density", k.accel_noise_density);
  r.get("rate_hz", k.rate_hz);
  r.get("gt_rate_hz", k.gt_rate_hz);
  r.get("seed", k.seed);
  r.get("dataset_id", k.dataset_id);
  r.finish();
  return c;
}

PreprocessConfig parse_preprocess(const json& j) {
  Reader r(j, "");
  PreprocessConfig c;
  r.get_path("manifest", c.manifest);
  r.get_path("out_dir", c.out_dir);
  if (r.has("preprocess")) c.options = read_preprocess(r.child("preprocess"));
  r.finish();
  return c;
}

nn::Architecture TrainRunConfig::architecture() const {
  nn::Architecture a = nn::architecture_from_tag(model, preprocess.window_len, train.dropout_p);
  if (scale_divisor > 1) a = nn::scaled_down(std::move(a), scale_divisor);
  return a;
}

TrainRunConfig parse_train(const json& j) {
  Reader r(j, "");
  TrainRunConfig c;
  r.get_path("manifest", c.manifest);
  r.get("model", c.model);
  if (c.model != "ag" && c.model != "g") throw InvalidArgument("model: expected 'ag' or 'g'");
  r.get("scale_divisor", c.scale_divisor);
  if (c.scale_divisor == 0) throw InvalidArgument("scale_divisor: must be >= 1");
  std::string precision = nn::to_string(c.precision);
  r.get("precision", precision);
  try {
    c.precision = nn::precision_from_string(precision);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(std::string("precision: ") + e.what());
  }
  if (r.has("train")) c.train = read_train(r.child("train"));
  if (r.has("preprocess")) c.preprocess = read_preprocess(r.child("preprocess"));
  r.get("val_fraction", c.val_fraction);
  if (!(c.val_fraction > 0.0 && c.val_fraction < 1.0)) {
    throw InvalidArgument("val_fraction: must lie in (0, 1)");
  }
  if (r.has("resume")) {
    std::filesystem::path p;
    r.get_path("resume", p);
    c.resume = p;
  }
  r.get_path("out_dir", c.out_dir);
  r.finish();
  validated("train", [&] { c.train.validate(); });
  return c;
}

EvalConfig parse_eval(const json& j) {
  Reader r(j, "");
  EvalConfig c;
  r.get_path("manifest", c.manifest);
  std::vector<std::string> ckpts;
  r.get("checkpoints", ckpts);
  for (const std::string& s : ckpts) c.checkpoints.emplace_back(s);
  if (r.has("model")) {
    std::string m;
    r.get("model", m);
    if (m != "ag" && m != "g") throw InvalidArgument("model: expected 'ag' or 'g'");
    c.model = m;
  }
  if (r.has("filter")) c.filter = read_filter(r.child("filter"));
  if (r.has("preprocess")) c.preprocess = read_preprocess(r.child("preprocess"));
  r.get_path("out_dir", c.out_dir);
  r.get("plots", c.plots);
  r.finish();
  return c;
}

CompareConfig parse_compare(const json& j) {
  Reader r(j, "");
  CompareConfig c;
  std::vector<std::string> reports;
  r.get("reports", reports);
  for (const std::string& s : reports) c.reports.emplace_back(s);
  r.get("allow_mixed", c.allow_mixed);
  r.get_path("out_dir", c.out_dir);
  r.finish();
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace doorinet::app
