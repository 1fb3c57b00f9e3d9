// SPDX-License-Identifier: Apache-2.0
#include "doorinet/app/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "doorinet/app/svg.hpp"
#include "doorinet/error.hpp"
#include "doorinet/evaluation.hpp"
#include "doorinet/nn/parallel.hpp"

namespace doorinet::app {

namespace {

std::filesystem::path ensure_dir(const std::filesystem::path& dir) {
  const std::filesystem::path d = dir.empty() ? default_data_dir() : dir;
  std::error_code ec;
  std::filesystem::create_directories(d, ec);
  if (ec || !std::filesystem::is_directory(d)) {
    throw Error("cannot create output directory '" + d.string() + "'");
  }
  return d;
}

std::filesystem::path manifest_or_default(const std::filesystem::path& p) {
  const std::filesystem::path m = p.empty() ? default_data_dir() / "manifest.json" : p;
  if (!std::filesystem::exists(m)) {
    throw Error("manifest '" + m.string() + "' not found; run 'doorinet simulate' or pass --manifest");
  }
  return m;
}

std::string history_csv(const std::vector<nn::EpochRecord>& history) {
  std::string out = "epoch,train_loss,val_loss,lr\n";
  for (const nn::EpochRecord& r : history) {
    out += std::to_string(r.epoch) + "," + format_double(r.train_loss) + "," +
           format_double(r.val_loss) + "," + format_double(r.lr) + "\n";
  }
  return out;
}

template <class T>
TrainOutcome train_typed(const TrainRunConfig& cfg, const Split& split,
                         const std::filesystem::path& out_dir, std::ostream& log) {
  const nn::Architecture arch = cfg.architecture();
  nn::Network<T> net(arch);
  nn::TrainState<T> state;
  if (cfg.resume) {
    const nn::Checkpoint ck = nn::load_checkpoint(*cfg.resume);
    if (!(ck.arch == arch)) {
      throw Error("checkpoint '" + cfg.resume->string() +
                  "' holds a different architecture than the configured model '" + cfg.model + "'");
    }
    if (ck.precision != cfg.precision) {
      throw Error("checkpoint '" + cfg.resume->string() + "' was trained in " +
                  nn::to_string(ck.precision) + ", config asks for " + nn::to_string(cfg.precision));
    }
    net = nn::restore_network<T>(ck);
    state = nn::restore_state<T>(ck);
    log << "resuming after epoch " << state.epochs_done << "\n";
  } else {
    net = nn::Network<T>::initialized(arch, cfg.train.seed);
  }
  log << model_name(cfg.model) << ": " << net.parameter_count() << " parameters, "
      << split.train.size() << " train / " << split.val.size() << " val windows\n";
  const auto t0 = std::chrono::steady_clock::now();
  state = nn::train(net, split.train, split.val, cfg.train, std::move(state),
                    [&](const nn::EpochRecord& r) {
                      const double s =
                          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                      char buf[160];
                      std::snprintf(buf, sizeof buf,
                                    "epoch %4d  train %.6f  val %.6f  lr %.3e  (%.0f s)\n", r.epoch,
                                    r.train_loss, r.val_loss, r.lr, s);
                      log << buf << std::flush;
                    });

  TrainOutcome out;
  out.checkpoint = out_dir / (model_name(cfg.model) + ".ckpt");
  out.history_csv = out_dir / (model_name(cfg.model) + "_loss.csv");
  nn::save_checkpoint(out.checkpoint, nn::make_checkpoint(net, cfg.train, state));
  write_text(out.history_csv, history_csv(state.history));
  PlotSeries tr{"train", {}, {}}, va{"validation", {}, {}};
  for (const nn::EpochRecord& r : state.history) {
    tr.x.push_back(r.epoch);
    tr.y.push_back(r.train_loss);
    va.x.push_back(r.epoch);
    va.y.push_back(r.val_loss);
  }
  write_text(out_dir / (model_name(cfg.model) + "_loss.svg"),
             line_plot_svg({model_name(cfg.model) + " loss", "epoch", "Huber loss", true}, {tr, va}));
  out.history = state.history;
  log << "checkpoint: " << out.checkpoint.string() << "\n";
  return out;
}

struct LoadedModel {
  std::string name;
  nn::Checkpoint ckpt;
};

std::vector<double> predict_checkpoint(const nn::Checkpoint& ck,
                                       std::span<const WindowSample> windows) {
  if (ck.precision == nn::Precision::f32) {
    return nn::predict(nn::restore_network<float>(ck), windows);
  }
  return nn::predict(nn::restore_network<double>(ck), windows);
}

}  // namespace

std::string model_name(const std::string& tag) { return tag + "-doorinet"; }

Manifest run_simulate(const SimulateConfig& config, std::ostream& log) {
  const std::filesystem::path dir = ensure_dir(config.out_dir);
  const Manifest m = sim::generate_corpus(config.corpus, dir);
  log << "wrote " << m.sessions.size() << " sessions\n" << (dir / "manifest.json").string() << "\n";
  return m;
}

Manifest run_preprocess(const PreprocessConfig& config, std::ostream& log) {
  const Manifest in = load_manifest(manifest_or_default(config.manifest));
  const std::filesystem::path dir = ensure_dir(config.out_dir);
  Manifest out = in;
  out.base_dir = dir;
  out.preprocessed = true;
  for (SessionEntry& e : out.sessions) {
    const PreparedSession p = prepare_session(in, e, config.options);
    e.imu_file = e.id + "_imu.csv";
    e.gt_file = e.id + "_gt.csv";
    e.gt_imu_file.reset();
    write_imu_csv(dir / e.imu_file, p.session.samples);
    write_gt_csv(dir / *e.gt_file, p.gt);
    log << e.id << " (" << to_string(e.role) << "): " << p.session.samples.size() << " samples, "
        << p.shut.size() << " shut periods\n";
  }
  save_manifest(dir / "manifest.json", out);
  log << (dir / "manifest.json").string() << "\n";
  return out;
}

TrainOutcome run_train(const TrainRunConfig& config, std::ostream& log) {
  const Manifest m = load_manifest(manifest_or_default(config.manifest));
  const std::filesystem::path dir = ensure_dir(config.out_dir);
  const Split split = training_windows(m, config.preprocess, config.val_fraction, config.train.seed);
  if (split.train.empty()) throw Error("training split is empty");
  if (split.val.empty()) throw Error("validation split is empty");
  if (config.precision == nn::Precision::f32) return train_typed<float>(config, split, dir, log);
  return train_typed<double>(config, split, dir, log);
}

MetricsReport run_eval(const EvalConfig& config, std::ostream& log) {
  const Manifest m = load_manifest(manifest_or_default(config.manifest));
  const std::filesystem::path dir = ensure_dir(config.out_dir);
  const std::vector<const SessionEntry*> tests = m.with_role(Role::test);
  if (tests.empty()) throw Error("manifest lists no test sessions");

  std::vector<LoadedModel> models;
  for (const std::filesystem::path& p : config.checkpoints) {
    if (!std::filesystem::exists(p)) {
      throw Error("checkpoint '" + p.string() + "' not found; train one with 'doorinet train'");
    }
    LoadedModel lm{"", nn::load_checkpoint(p)};
    if (config.model && lm.ckpt.arch.tag != *config.model) {
      throw Error("checkpoint '" + p.string() + "' holds model '" + lm.ckpt.arch.tag +
                  "' but --model is '" + *config.model + "'");
    }
    if (lm.ckpt.arch.window_len != config.preprocess.window_len) {
      throw Error("checkpoint '" + p.string() + "' expects windows of " +
                  std::to_string(lm.ckpt.arch.window_len) + " samples, evaluation uses " +
                  std::to_string(config.preprocess.window_len));
    }
    lm.name = model_name(lm.ckpt.arch.tag);
    models.push_back(std::move(lm));
  }

  MetricsReport report;
  report.dataset_id = m.dataset_id;
  std::vector<MetricsRow> rows;
  for (const SessionEntry* e : tests) {
    const PreparedSession p = prepare_session(m, *e, config.preprocess);
    const std::vector<WindowSample> windows = evaluation_windows(p, config.preprocess.window_len);
    const std::vector<double> grid = evaluation_grid(windows);
    madgwick::Config filter = config.filter;
    if (p.session.rate_hz > 0.0) filter.sample_period = 1.0 / p.session.rate_hz;
    std::vector<Estimate> est = baseline_estimates(p.session.samples, filter);
    for (const LoadedModel& lm : models) {
      est.push_back({lm.name, heading_from_increments(windows, predict_checkpoint(lm.ckpt, windows))});
    }
    const std::vector<MetricsRow> r = score(est, p.gt, grid, e->id, m.dataset_id);
    rows.insert(rows.end(), r.begin(), r.end());
    if (config.plots) {
      std::vector<PlotSeries> series{{"ground truth", p.gt.t, p.gt.heading_deg}};
      for (const Estimate& x : est) series.push_back({x.estimator, x.heading.t, x.heading.heading_deg});
      write_text(dir / ("heading_" + e->id + ".svg"),
                 line_plot_svg({"Heading, session " + e->id, "time [s]", "heading [deg]"}, series));
    }
  }
  report.rows = rows;
  if (tests.size() > 1) {
    const std::vector<MetricsRow> pooled = pooled_rows(rows);
    report.rows.insert(report.rows.end(), pooled.begin(), pooled.end());
  }
  save_report(dir / "report.json", report);
  const std::string table = format_table(report.rows);
  write_text(dir / "report.txt", table);
  log << table << (dir / "report.json").string() << "\n";
  return report;
}

MetricsReport run_compare(const CompareConfig& config, std::ostream& log) {
  if (config.reports.empty()) throw InvalidArgument("compare: need at least one report");
  std::vector<MetricsReport> reports;
  for (const std::filesystem::path& p : config.reports) reports.push_back(load_report(p));
  const MetricsReport merged = merge_reports(reports, config.allow_mixed);
  const std::filesystem::path dir = ensure_dir(config.out_dir);
  save_report(dir / "compare.json", merged);
  const std::string table = format_table(merged.rows);
  write_text(dir / "compare.txt", table);
  log << table;
  return merged;
}

}  // namespace doorinet::app
