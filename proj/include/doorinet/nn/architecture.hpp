// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace doorinet::nn {

/// Sensor stream feeding a recurrent head.
enum class Channel { accel, gyro };

std::string to_string(Channel c);
Channel channel_from_string(const std::string& s);

/// Stack of bidirectional GRU layers over one sensor channel. `hidden` holds
/// per-direction hidden sizes; each layer emits 2*hidden features per step.
struct HeadSpec {
  Channel channel = Channel::gyro;
  std::vector<std::size_t> hidden;
  friend bool operator==(const HeadSpec&, const HeadSpec&) = default;
};

struct FcSpec {
  std::size_t out = 1;
  double dropout = 0.0;  // inverted dropout between the product and tanh
  bool tanh = true;
  friend bool operator==(const FcSpec&, const FcSpec&) = default;
};

/// Network layout: heads run in parallel and are concatenated per time step,
/// the trunk BiGRU stack follows, the sequence is flattened timestep-major
/// and fed through the fully connected stack.
struct Architecture {
  std::string tag;  // "g" or "ag"
  std::size_t window_len = 20;
  std::size_t input_size = 3;
  std::vector<HeadSpec> heads;
  std::vector<std::size_t> trunk;
  std::vector<FcSpec> fc;

  std::size_t head_concat_width() const;
  /// Per-timestep feature width entering the flatten step.
  std::size_t sequence_width() const;
  std::size_t flatten_width() const;
  void validate() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Gyro-only network: BiGRU(3->64) -> BiGRU(128->128) -> flatten -> 8 FC.
Architecture g_doorinet(std::size_t window_len = 20, double dropout_p = 0.2);

/// Accelerometer + gyro network: two 3-layer BiGRU(64) heads -> 2-layer
/// BiGRU(256) -> flatten -> 8 FC.
Architecture ag_doorinet(std::size_t window_len = 20, double dropout_p = 0.2);

/// Divides every hidden size and FC width (except the scalar output) by
/// `divisor`, rounding up.
Architecture scaled_down(Architecture arch, std::size_t divisor);

/// Replaces head/trunk hidden sizes and FC widths, keeping layer counts.
/// `fc_widths` must have one entry per FC layer, the last being 1.
Architecture resized(Architecture arch, std::size_t window_len, std::size_t head_hidden,
                     std::size_t trunk_hidden, const std::vector<std::size_t>& fc_widths);

/// Builds g_doorinet() or ag_doorinet() from a tag.
Architecture architecture_from_tag(const std::string& tag, std::size_t window_len = 20,
                                   double dropout_p = 0.2);

/// One named tensor inside the flat parameter buffer (column-major).
struct TensorSlot {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool is_bias = false;
  std::size_t size() const { return rows * cols; }
};

/// Offsets of every GRU direction's tensors.
struct GruSlots {
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::size_t w_input = 0;      // 3H x I, gate rows ordered reset, update, candidate
  std::size_t w_hidden_rz = 0;  // 2H x H
  std::size_t w_hidden_n = 0;   // H x H
  std::size_t bias = 0;         // 3H
};

struct BiGruSlots {
  GruSlots forward;
  GruSlots backward;
};

struct FcSlots {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight = 0;  // out x in
  std::size_t bias = 0;    // out
};

class ParameterLayout {
 public:
  explicit ParameterLayout(const Architecture& arch);

  std::size_t size() const { return size_; }
  const std::vector<TensorSlot>& tensors() const { return tensors_; }
  const std::vector<std::vector<BiGruSlots>>& heads() const { return heads_; }
  const std::vector<BiGruSlots>& trunk() const { return trunk_; }
  const std::vector<FcSlots>& fc() const { return fc_; }

 private:
  std::size_t add(std::string name, std::size_t rows, std::size_t cols, bool is_bias);
  GruSlots add_gru(const std::string& prefix, std::size_t input, std::size_t hidden);
  BiGruSlots add_bigru(const std::string& prefix, std::size_t input, std::size_t hidden);

  std::size_t size_ = 0;
  std::vector<TensorSlot> tensors_;
  std::vector<std::vector<BiGruSlots>> heads_;
  std::vector<BiGruSlots> trunk_;
  std::vector<FcSlots> fc_;
};

/// Human-readable layer listing (kind, input width, output width).
struct LayerInfo {
  std::string kind;  // bigru | fc | dropout | tanh | flatten | concat
  std::string name;
  std::size_t in = 0;
  std::size_t out = 0;
  double p = 0.0;
};
std::vector<LayerInfo> describe_layers(const Architecture& arch);

/// Closed-form parameter counts.
std::size_t gru_direction_parameter_count(std::size_t input, std::size_t hidden);
std::size_t parameter_count(const Architecture& arch);

}  // namespace doorinet::nn
