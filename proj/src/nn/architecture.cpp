// SPDX-License-Identifier: Apache-2.0
#include "doorinet/nn/architecture.hpp"

#include <sstream>

#include "doorinet/error.hpp"

namespace doorinet::nn {

std::string to_string(Channel c) { return c == Channel::accel ? "accel" : "gyro"; }

Channel channel_from_string(const std::string& s) {
  if (s == "accel") return Channel::accel;
  if (s == "gyro") return Channel::gyro;
  throw FormatError("unknown channel '" + s + "'");
}

std::size_t Architecture::head_concat_width() const {
  std::size_t width = 0;
  for (const HeadSpec& h : heads) width += 2 * h.hidden.back();
  return width;
}

std::size_t Architecture::sequence_width() const {
  return trunk.empty() ? head_concat_width() : 2 * trunk.back();
}

std::size_t Architecture::flatten_width() const { return window_len * sequence_width(); }

void Architecture::validate() const {
  if (window_len == 0) throw InvalidArgument("architecture: window_len must be positive");
  if (input_size == 0) throw InvalidArgument("architecture: input_size must be positive");
  if (heads.empty()) throw InvalidArgument("architecture: at least one head is required");
  for (const HeadSpec& h : heads) {
    if (h.hidden.empty()) throw InvalidArgument("architecture: head without layers");
    for (std::size_t w : h.hidden) {
      if (w == 0) throw InvalidArgument("architecture: zero hidden size");
    }
  }
  for (std::size_t w : trunk) {
    if (w == 0) throw InvalidArgument("architecture: zero trunk hidden size");
  }
  if (fc.empty()) throw InvalidArgument("architecture: at least one FC layer is required");
  for (const FcSpec& f : fc) {
    if (f.out == 0) throw InvalidArgument("architecture: zero FC width");
    if (!(f.dropout >= 0.0 && f.dropout < 1.0)) {
      throw InvalidArgument("architecture: dropout must lie in [0, 1)");
    }
  }
  if (fc.back().out != 1 || fc.back().tanh) {
    throw InvalidArgument("architecture: last FC layer must be a linear 1-output layer");
  }
}

namespace {

std::vector<FcSpec> fc_stack(double dropout_p, std::size_t dropout_layers) {
  const std::size_t widths[] = {2560, 512, 128, 32, 16, 8, 4, 1};
  std::vector<FcSpec> fc;
  for (std::size_t i = 0; i < std::size(widths); ++i) {
    const bool last = i + 1 == std::size(widths);
    fc.push_back({widths[i], i < dropout_layers ? dropout_p : 0.0, !last});
  }
  return fc;
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

Architecture g_doorinet(std::size_t window_len, double dropout_p) {
  Architecture a;
  a.tag = "g";
  a.window_len = window_len;
  a.heads = {HeadSpec{Channel::gyro, {64}}};
  a.trunk = {128};
  a.fc = fc_stack(dropout_p, 1);
  a.validate();
  return a;
}

Architecture ag_doorinet(std::size_t window_len, double dropout_p) {
  Architecture a;
  a.tag = "ag";
  a.window_len = window_len;
  a.heads = {HeadSpec{Channel::accel, {64, 64, 64}}, HeadSpec{Channel::gyro, {64, 64, 64}}};
  a.trunk = {256, 256};
  a.fc = fc_stack(dropout_p, 2);
  a.validate();
  return a;
}

Architecture scaled_down(Architecture arch, std::size_t divisor) {
  if (divisor == 0) throw InvalidArgument("scaled_down: divisor must be positive");
  for (HeadSpec& h : arch.heads) {
    for (std::size_t& w : h.hidden) w = ceil_div(w, divisor);
  }
  for (std::size_t& w : arch.trunk) w = ceil_div(w, divisor);
  for (std::size_t i = 0; i + 1 < arch.fc.size(); ++i) arch.fc[i].out = ceil_div(arch.fc[i].out, divisor);
  arch.validate();
  return arch;
}

Architecture resized(Architecture arch, std::size_t window_len, std::size_t head_hidden,
                     std::size_t trunk_hidden, const std::vector<std::size_t>& fc_widths) {
  if (fc_widths.size() != arch.fc.size()) {
    throw InvalidArgument("resized: need one width per FC layer");
  }
  arch.window_len = window_len;
  for (HeadSpec& h : arch.heads) {
    for (std::size_t& w : h.hidden) w = head_hidden;
  }
  for (std::size_t& w : arch.trunk) w = trunk_hidden;
  for (std::size_t i = 0; i < fc_widths.size(); ++i) arch.fc[i].out = fc_widths[i];
  arch.validate();
  return arch;
}

Architecture architecture_from_tag(const std::string& tag, std::size_t window_len,
                                   double dropout_p) {
  if (tag == "g") return g_doorinet(window_len, dropout_p);
  if (tag == "ag") return ag_doorinet(window_len, dropout_p);
  throw InvalidArgument("unknown model '" + tag + "' (expected 'g' or 'ag')");
}

ParameterLayout::ParameterLayout(const Architecture& arch) {
  arch.validate();
  for (std::size_t k = 0; k < arch.heads.size(); ++k) {
    const HeadSpec& head = arch.heads[k];
    std::vector<BiGruSlots> layers;
    std::size_t input = arch.input_size;
    for (std::size_t l = 0; l < head.hidden.size(); ++l) {
      std::ostringstream prefix;
      prefix << "head" << k << "." << to_string(head.channel) << ".l" << l;
      layers.push_back(add_bigru(prefix.str(), input, head.hidden[l]));
      input = 2 * head.hidden[l];
    }
    heads_.push_back(std::move(layers));
  }
  std::size_t input = arch.head_concat_width();
  for (std::size_t l = 0; l < arch.trunk.size(); ++l) {
    trunk_.push_back(add_bigru("trunk.l" + std::to_string(l), input, arch.trunk[l]));
    input = 2 * arch.trunk[l];
  }
  input = arch.flatten_width();
  for (std::size_t i = 0; i < arch.fc.size(); ++i) {
    const std::string prefix = "fc" + std::to_string(i + 1);
    FcSlots slots;
    slots.in = input;
    slots.out = arch.fc[i].out;
    slots.weight = add(prefix + ".weight", slots.out, slots.in, false);
    slots.bias = add(prefix + ".bias", slots.out, 1, true);
    fc_.push_back(slots);
    input = slots.out;
  }
}

std::size_t ParameterLayout::add(std::string name, std::size_t rows, std::size_t cols,
                                 bool is_bias) {
  const std::size_t offset = size_;
  tensors_.push_back({std::move(name), offset, rows, cols, is_bias});
  size_ += rows * cols;
  return offset;
}

GruSlots ParameterLayout::add_gru(const std::string& prefix, std::size_t input,
                                  std::size_t hidden) {
  GruSlots s;
  s.input = input;
  s.hidden = hidden;
  s.w_input = add(prefix + ".w_input", 3 * hidden, input, false);
  s.w_hidden_rz = add(prefix + ".w_hidden_rz", 2 * hidden, hidden, false);
  s.w_hidden_n = add(prefix + ".w_hidden_n", hidden, hidden, false);
  s.bias = add(prefix + ".bias", 3 * hidden, 1, true);
  return s;
}

BiGruSlots ParameterLayout::add_bigru(const std::string& prefix, std::size_t input,
                                      std::size_t hidden) {
  BiGruSlots s;
  s.forward = add_gru(prefix + ".fwd", input, hidden);
  s.backward = add_gru(prefix + ".bwd", input, hidden);
  return s;
}

std::vector<LayerInfo> describe_layers(const Architecture& arch) {
  std::vector<LayerInfo> out;
  for (std::size_t k = 0; k < arch.heads.size(); ++k) {
    std::size_t input = arch.input_size;
    for (std::size_t l = 0; l < arch.heads[k].hidden.size(); ++l) {
      const std::size_t h = arch.heads[k].hidden[l];
      out.push_back({"bigru", to_string(arch.heads[k].channel) + ".l" + std::to_string(l), input,
                     2 * h, 0.0});
      input = 2 * h;
    }
  }
  if (arch.heads.size() > 1) {
    out.push_back({"concat", "heads", arch.head_concat_width(), arch.head_concat_width(), 0.0});
  }
  std::size_t input = arch.head_concat_width();
  for (std::size_t l = 0; l < arch.trunk.size(); ++l) {
    out.push_back({"bigru", "trunk.l" + std::to_string(l), input, 2 * arch.trunk[l], 0.0});
    input = 2 * arch.trunk[l];
  }
  out.push_back({"flatten", "flatten", input, arch.flatten_width(), 0.0});
  input = arch.flatten_width();
  for (std::size_t i = 0; i < arch.fc.size(); ++i) {
    const FcSpec& f = arch.fc[i];
    const std::string name = "fc" + std::to_string(i + 1);
    out.push_back({"fc", name, input, f.out, 0.0});
    if (f.dropout > 0.0) out.push_back({"dropout", name, f.out, f.out, f.dropout});
    if (f.tanh) out.push_back({"tanh", name, f.out, f.out, 0.0});
    input = f.out;
  }
  return out;
}

std::size_t gru_direction_parameter_count(std::size_t input, std::size_t hidden) {
  return 3 * hidden * input + 3 * hidden * hidden + 3 * hidden;
}

std::size_t parameter_count(const Architecture& arch) {
  std::size_t n = 0;
  for (const HeadSpec& h : arch.heads) {
    std::size_t input = arch.input_size;
    for (std::size_t w : h.hidden) {
      n += 2 * gru_direction_parameter_count(input, w);
      input = 2 * w;
    }
  }
  std::size_t input = arch.head_concat_width();
  for (std::size_t w : arch.trunk) {
    n += 2 * gru_direction_parameter_count(input, w);
    input = 2 * w;
  }
  input = arch.flatten_width();
  for (const FcSpec& f : arch.fc) {
    n += f.out * input + f.out;
    input = f.out;
  }
  return n;
}

}  // namespace doorinet::nn
