// SPDX-License-Identifier: Apache-2.0
#include "doorinet/nn/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>

#include "doorinet/error.hpp"

namespace doorinet::nn {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'D', 'I', 'N', 'E', 'T', 'C', 'K', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError("checkpoint: truncated header");
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}

void put_f64_array(std::ostream& out, const std::vector<double>& v) {
  std::vector<char> bytes(v.size() * 8);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(v[i]);
    for (int k = 0; k < 8; ++k) bytes[i * 8 + k] = static_cast<char>((bits >> (8 * k)) & 0xff);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<double> get_f64_array(std::istream& in, std::size_t n, const char* what) {
  std::vector<unsigned char> bytes(n * 8);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw FormatError(std::string("checkpoint: truncated ") + what + " array");
  }
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= std::uint64_t(bytes[i * 8 + k]) << (8 * k);
    v[i] = std::bit_cast<double>(bits);
  }
  return v;
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw FormatError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw FormatError(where + ": unknown key '" + key + "'");
  }
}

template <class V>
std::vector<double> widen(const V& v) {
  return std::vector<double>(v.begin(), v.end());
}

template <class T>
std::vector<T> narrow(const std::vector<double>& v) {
  std::vector<T> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<T>(v[i]);
  return out;
}

}  // namespace

std::string to_string(Precision p) { return p == Precision::f64 ? "f64" : "f32"; }

Precision precision_from_string(const std::string& s) {
  if (s == "f64") return Precision::f64;
  if (s == "f32") return Precision::f32;
  throw InvalidArgument("unknown precision '" + s + "' (expected f64 or f32)");
}

void to_json(json& j, const Architecture& a) {
  json heads = json::array();
  for (const HeadSpec& h : a.heads) heads.push_back({{"channel", to_string(h.channel)}, {"hidden", h.hidden}});
  json fc = json::array();
  for (const FcSpec& f : a.fc) fc.push_back({{"out", f.out}, {"dropout", f.dropout}, {"tanh", f.tanh}});
  j = json{{"tag", a.tag},     {"window_len", a.window_len}, {"input_size", a.input_size},
           {"heads", heads},   {"trunk", a.trunk},           {"fc", fc}};
}

void from_json(const json& j, Architecture& a) {
  reject_unknown(j, {"tag", "window_len", "input_size", "heads", "trunk", "fc"}, "architecture");
  a = Architecture{};
  a.tag = j.at("tag").get<std::string>();
  a.window_len = j.at("window_len").get<std::size_t>();
  a.input_size = j.at("input_size").get<std::size_t>();
  for (const json& h : j.at("heads")) {
    reject_unknown(h, {"channel", "hidden"}, "architecture.heads[]");
    a.heads.push_back({channel_from_string(h.at("channel").get<std::string>()),
                       h.at("hidden").get<std::vector<std::size_t>>()});
  }
  a.trunk = j.at("trunk").get<std::vector<std::size_t>>();
  for (const json& f : j.at("fc")) {
    reject_unknown(f, {"out", "dropout", "tanh"}, "architecture.fc[]");
    a.fc.push_back({f.at("out").get<std::size_t>(), f.at("dropout").get<double>(),
                    f.at("tanh").get<bool>()});
  }
  a.validate();
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"epochs", c.epochs},
           {"initial_lr", c.initial_lr},
           {"lr_factor", c.lr_factor},
           {"plateau_patience", c.plateau_patience},
           {"plateau_threshold", c.plateau_threshold},
           {"weight_decay", c.weight_decay},
           {"batch_size", c.batch_size},
           {"seed", c.seed},
           {"dropout_p", c.dropout_p},
           {"micro_batch", c.micro_batch}};
}

void from_json(const json& j, TrainConfig& c) {
  reject_unknown(j,
                 {"epochs", "initial_lr", "lr_factor", "plateau_patience", "plateau_threshold",
                  "weight_decay", "batch_size", "seed", "dropout_p", "micro_batch"},
                 "train");
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("epochs", c.epochs);
  get("initial_lr", c.initial_lr);
  get("lr_factor", c.lr_factor);
  get("plateau_patience", c.plateau_patience);
  get("plateau_threshold", c.plateau_threshold);
  get("weight_decay", c.weight_decay);
  get("batch_size", c.batch_size);
  get("seed", c.seed);
  get("dropout_p", c.dropout_p);
  get("micro_batch", c.micro_batch);
}

void to_json(json& j, const EpochRecord& r) {
  j = json{{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"val_loss", r.val_loss}, {"lr", r.lr}};
}

void from_json(const json& j, EpochRecord& r) {
  r.epoch = j.at("epoch").get<int>();
  r.train_loss = j.at("train_loss").get<double>();
  r.val_loss = j.at("val_loss").get<double>();
  r.lr = j.at("lr").get<double>();
}

template <class T>
Checkpoint make_checkpoint(const Network<T>& net, const TrainConfig& config,
                           const TrainState<T>& state) {
  Checkpoint c;
  c.arch = net.architecture();
  c.precision = std::is_same_v<T, double> ? Precision::f64 : Precision::f32;
  c.config = config;
  c.parameters = widen(net.parameters());
  c.state.epochs_done = state.epochs_done;
  c.state.history = state.history;
  c.state.adam.step = state.adam.step;
  c.state.adam.m = widen(state.adam.m);
  c.state.adam.v = widen(state.adam.v);
  c.state.scheduler = state.scheduler;
  return c;
}

template <class T>
Network<T> restore_network(const Checkpoint& ckpt) {
  Network<T> net(ckpt.arch);
  if (ckpt.parameters.size() != net.parameter_count()) {
    throw FormatError("checkpoint: " + std::to_string(ckpt.parameters.size()) +
                      " parameters stored but architecture '" + ckpt.arch.tag + "' needs " +
                      std::to_string(net.parameter_count()));
  }
  const std::vector<T> values = narrow<T>(ckpt.parameters);
  net.parameters().assign(values.begin(), values.end());
  return net;
}

template <class T>
TrainState<T> restore_state(const Checkpoint& ckpt) {
  TrainState<T> s;
  s.epochs_done = ckpt.state.epochs_done;
  s.history = ckpt.state.history;
  s.adam.step = ckpt.state.adam.step;
  s.adam.m = narrow<T>(ckpt.state.adam.m);
  s.adam.v = narrow<T>(ckpt.state.adam.v);
  s.scheduler = ckpt.state.scheduler;
  return s;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::size_t n = ckpt.parameters.size();
  const bool has_moments = !ckpt.state.adam.m.empty();
  if (has_moments && (ckpt.state.adam.m.size() != n || ckpt.state.adam.v.size() != n)) {
    throw InvalidArgument("save_checkpoint: optimizer state size mismatch");
  }
  json tensors = json::array();
  const ParameterLayout layout(ckpt.arch);
  for (const TensorSlot& s : layout.tensors()) {
    tensors.push_back({{"name", s.name}, {"offset", s.offset}, {"rows", s.rows}, {"cols", s.cols}});
  }
  const PlateauScheduler& sch = ckpt.state.scheduler;
  json header = {
      {"format", "doorinet-checkpoint"},
      {"architecture", ckpt.arch},
      {"tensors", tensors},
      {"parameter_count", n},
      {"precision", to_string(ckpt.precision)},
      {"seed", ckpt.config.seed},
      {"train_config", ckpt.config},
      {"state",
       {{"epochs_done", ckpt.state.epochs_done},
        {"history", ckpt.state.history},
        {"adam_step", ckpt.state.adam.step},
        {"lr", sch.lr()},
        {"best", std::isfinite(sch.best()) ? json(sch.best()) : json(nullptr)},
        {"bad_epochs", sch.bad_epochs()}}},
      {"has_optimizer_state", has_moments},
  };
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(kMagic, sizeof kMagic);
  put_u32(out, Checkpoint::kVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put_f64_array(out, ckpt.parameters);
  if (has_moments) {
    put_f64_array(out, ckpt.state.adam.m);
    put_f64_array(out, ckpt.state.adam.v);
  }
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path.string() + "'");
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw FormatError("'" + path.string() + "' is not a doorinet checkpoint");
  }
  const std::uint32_t version = get_u32(in);
  if (version != Checkpoint::kVersion) {
    throw FormatError("checkpoint version " + std::to_string(version) + " is not supported");
  }
  const std::uint32_t header_len = get_u32(in);
  std::string text(header_len, '\0');
  if (!in.read(text.data(), header_len)) throw FormatError("checkpoint: truncated header");
  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }

  Checkpoint c;
  try {
    c.arch = header.at("architecture").get<Architecture>();
    c.precision = precision_from_string(header.at("precision").get<std::string>());
    c.config = header.at("train_config").get<TrainConfig>();
    const json& st = header.at("state");
    c.state.epochs_done = st.at("epochs_done").get<int>();
    c.state.history = st.at("history").get<std::vector<EpochRecord>>();
    c.state.adam.step = st.at("adam_step").get<std::int64_t>();
    const double best = st.at("best").is_null() ? std::numeric_limits<double>::infinity()
                                                : st.at("best").get<double>();
    c.state.scheduler = PlateauScheduler(c.config.initial_lr, c.config.plateau());
    c.state.scheduler.restore(st.at("lr").get<double>(), best, st.at("bad_epochs").get<int>());
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
  const std::size_t n = header.at("parameter_count").get<std::size_t>();
  if (n != ParameterLayout(c.arch).size()) {
    throw FormatError("checkpoint: parameter_count does not match the stored architecture");
  }
  c.parameters = get_f64_array(in, n, "parameter");
  if (header.at("has_optimizer_state").get<bool>()) {
    c.state.adam.m = get_f64_array(in, n, "adam_m");
    c.state.adam.v = get_f64_array(in, n, "adam_v");
  }
  return c;
}

template Checkpoint make_checkpoint<double>(const Network<double>&, const TrainConfig&,
                                            const TrainState<double>&);
template Checkpoint make_checkpoint<float>(const Network<float>&, const TrainConfig&,
                                           const TrainState<float>&);
template Network<double> restore_network<double>(const Checkpoint&);
template Network<float> restore_network<float>(const Checkpoint&);
template TrainState<double> restore_state<double>(const Checkpoint&);
template TrainState<float> restore_state<float>(const Checkpoint&);

}  // namespace doorinet::nn
