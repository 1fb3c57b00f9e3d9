// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "doorinet/dataset.hpp"
#include "doorinet/madgwick.hpp"
#include "doorinet/nn/checkpoint.hpp"
#include "doorinet/nn/train.hpp"
#include "doorinet/simulator.hpp"

namespace doorinet::app {

/// Directory used when neither a flag nor the config names one:
/// $DOORINET_DATA_DIR, else ./doorinet-data.
std::filesystem::path default_data_dir();

struct SimulateConfig {
  sim::CorpusConfig corpus;
  std::filesystem::path out_dir;
};

struct PreprocessConfig {
  std::filesystem::path manifest;
  PreprocessOptions options;
  std::filesystem::path out_dir;
};

struct TrainRunConfig {
  std::filesystem::path manifest;
  std::string model = "ag";
  std::size_t scale_divisor = 1;  // 1 = published sizes, 2 = halved, ...
  nn::Precision precision = nn::Precision::f64;
  nn::TrainConfig train;
  PreprocessOptions preprocess;
  double val_fraction = 0.2;
  std::optional<std::filesystem::path> resume;
  std::filesystem::path out_dir;

  nn::Architecture architecture() const;
};

struct EvalConfig {
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> checkpoints;
  std::optional<std::string> model;  // when set, every checkpoint must be this model
  madgwick::Config filter;
  PreprocessOptions preprocess;
  std::filesystem::path out_dir;
  bool plots = true;
};

struct CompareConfig {
  std::vector<std::filesystem::path> reports;
  bool allow_mixed = false;
  std::filesystem::path out_dir;
};

// Each parser rejects unknown keys and names the offending field
// ("train.batch_size: ..."). Missing keys keep their defaults.
SimulateConfig parse_simulate(const nlohmann::json& j);
PreprocessConfig parse_preprocess(const nlohmann::json& j);
TrainRunConfig parse_train(const nlohmann::json& j);
EvalConfig parse_eval(const nlohmann::json& j);
CompareConfig parse_compare(const nlohmann::json& j);

/// Parses a JSON file; errors carry the path.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace doorinet::app
