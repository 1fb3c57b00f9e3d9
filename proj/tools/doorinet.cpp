// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "doorinet/app/commands.hpp"
#include "doorinet/app/config.hpp"

namespace app = doorinet::app;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<std::string> model;
};

nlohmann::json config_json(const Common& c) {
  if (c.config.empty()) return nlohmann::json::object();
  return app::read_json_file(c.config);
}

void add_common(CLI::App* sub, Common& c, bool with_model) {
  sub->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "Override the config seed");
  sub->add_option("--out-dir", c.out_dir, "Output directory (default $DOORINET_DATA_DIR or ./doorinet-data)");
  if (with_model) {
    sub->add_option("--model", c.model, "Model variant")->check(CLI::IsMember({"ag", "g"}));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Door heading estimation from IMU data"};
  cli.require_subcommand(1);

  Common sim_c, pre_c, train_c, eval_c, cmp_c;
  std::string manifest, resume;
  std::vector<std::string> checkpoints, reports;
  bool allow_mixed = false;
  bool no_plots = false;

  CLI::App* sim = cli.add_subcommand("simulate", "Generate a synthetic door corpus");
  add_common(sim, sim_c, false);

  CLI::App* pre = cli.add_subcommand("preprocess", "Calibrate and zero-drift a dataset");
  add_common(pre, pre_c, false);
  pre->add_option("--manifest", manifest, "Dataset manifest");

  CLI::App* train = cli.add_subcommand("train", "Train a network");
  add_common(train, train_c, true);
  train->add_option("--manifest", manifest, "Dataset manifest");
  train->add_option("--resume", resume, "Continue from a checkpoint");

  CLI::App* eval = cli.add_subcommand("eval", "Score baselines and checkpoints on test sessions");
  add_common(eval, eval_c, true);
  eval->add_option("--manifest", manifest, "Dataset manifest");
  eval->add_option("--checkpoint", checkpoints, "Checkpoint file (repeatable)");
  eval->add_flag("--no-plots", no_plots, "Skip heading plots");

  CLI::App* cmp = cli.add_subcommand("compare", "Merge metric reports");
  add_common(cmp, cmp_c, false);
  cmp->add_option("reports", reports, "Report JSON files");
  cmp->add_flag("--allow-mixed", allow_mixed, "Allow reports from different datasets");

  CLI11_PARSE(cli, argc, argv);

  try {
    if (sim->parsed()) {
      app::SimulateConfig c = app::parse_simulate(config_json(sim_c));
      if (sim_c.seed) c.corpus.seed = *sim_c.seed;
      if (!sim_c.out_dir.empty()) c.out_dir = sim_c.out_dir;
      app::run_simulate(c, std::cout);
    } else if (pre->parsed()) {
      app::PreprocessConfig c = app::parse_preprocess(config_json(pre_c));
      if (!manifest.empty()) c.manifest = manifest;
      if (!pre_c.out_dir.empty()) c.out_dir = pre_c.out_dir;
      app::run_preprocess(c, std::cout);
    } else if (train->parsed()) {
      app::TrainRunConfig c = app::parse_train(config_json(train_c));
      if (!manifest.empty()) c.manifest = manifest;
      if (train_c.seed) c.train.seed = *train_c.seed;
      if (train_c.model) c.model = *train_c.model;
      if (!resume.empty()) c.resume = fs::path(resume);
      if (!train_c.out_dir.empty()) c.out_dir = train_c.out_dir;
      app::run_train(c, std::cout);
    } else if (eval->parsed()) {
      app::EvalConfig c = app::parse_eval(config_json(eval_c));
      if (!manifest.empty()) c.manifest = manifest;
      if (!checkpoints.empty()) c.checkpoints.assign(checkpoints.begin(), checkpoints.end());
      if (eval_c.model) c.model = *eval_c.model;
      if (no_plots) c.plots = false;
      if (!eval_c.out_dir.empty()) c.out_dir = eval_c.out_dir;
      app::run_eval(c, std::cout);
    } else if (cmp->parsed()) {
      app::CompareConfig c = app::parse_compare(config_json(cmp_c));
      if (!reports.empty()) c.reports.assign(reports.begin(), reports.end());
      if (allow_mixed) c.allow_mixed = true;
      if (!cmp_c.out_dir.empty()) c.out_dir = cmp_c.out_dir;
      app::run_compare(c, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "doorinet: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
