// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <ostream>
#include <vector>

#include "doorinet/app/config.hpp"
#include "doorinet/metrics.hpp"

namespace doorinet::app {

/// Writes the synthetic corpus and its manifest.
Manifest run_simulate(const SimulateConfig& config, std::ostream& log);

/// Calibrates and zero-drifts every session and writes a manifest marked
/// preprocessed next to the new files.
Manifest run_preprocess(const PreprocessConfig& config, std::ostream& log);

struct TrainOutcome {
  std::filesystem::path checkpoint;
  std::filesystem::path history_csv;
  std::vector<nn::EpochRecord> history;
};

/// Trains (or resumes) a model and writes <model>.ckpt, <model>_loss.csv and
/// <model>_loss.svg into the output directory.
TrainOutcome run_train(const TrainRunConfig& config, std::ostream& log);

/// Scores the baselines and every checkpoint on the manifest's test
/// sessions; writes report.json, report.txt and per-session heading plots.
MetricsReport run_eval(const EvalConfig& config, std::ostream& log);

/// Merges reports into compare.json and compare.txt.
MetricsReport run_compare(const CompareConfig& config, std::ostream& log);

/// Display name of a model tag, e.g. "ag" -> "ag-doorinet".
std::string model_name(const std::string& tag);

}  // namespace doorinet::app
