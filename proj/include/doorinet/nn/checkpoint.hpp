// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "doorinet/nn/network.hpp"
#include "doorinet/nn/train.hpp"

namespace doorinet::nn {

enum class Precision { f64, f32 };
std::string to_string(Precision p);
Precision precision_from_string(const std::string& s);

/// Saved model: architecture, flat parameters and (optionally) the optimizer
/// and scheduler state needed to resume training. Values are widened to
/// double on disk regardless of the training precision. Layout is described
/// in docs/FORMATS.md.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  Architecture arch;
  Precision precision = Precision::f64;
  TrainConfig config;
  std::vector<double> parameters;
  TrainState<double> state;  // adam moments empty when not saved
};

template <class T>
Checkpoint make_checkpoint(const Network<T>& net, const TrainConfig& config,
                           const TrainState<T>& state);

/// Restores the network; throws FormatError when the stored parameter count
/// does not match the architecture.
template <class T>
Network<T> restore_network(const Checkpoint& ckpt);

template <class T>
TrainState<T> restore_state(const Checkpoint& ckpt);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const Architecture& a);
void from_json(const nlohmann::json& j, Architecture& a);
void to_json(nlohmann::json& j, const TrainConfig& c);
/// Rejects unknown keys; missing keys keep their defaults.
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const EpochRecord& r);
void from_json(const nlohmann::json& j, EpochRecord& r);

}  // namespace doorinet::nn
