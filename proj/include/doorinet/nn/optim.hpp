// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace doorinet::nn {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;
};

template <class T>
struct AdamWState {
  std::int64_t step = 0;
  std::vector<T> m;
  std::vector<T> v;
};

/// Adam with decoupled weight decay:
///   p <- p (1 - lr wd);  m, v moment updates;
///   p <- p - lr/(1-b1^t) * m / (sqrt(v)/sqrt(1-b2^t) + eps)
/// Elementwise and OpenMP-parallel; deterministic for any thread count.
template <class T>
void adamw_step(std::span<T> params, std::span<const T> grads, AdamWState<T>& state, double lr,
                const AdamWConfig& config);

struct PlateauConfig {
  double factor = 0.5;
  int patience = 3;
  double threshold = 0.01;  // absolute, in loss units
  double min_lr = 0.0;
};

/// Reduce-on-plateau: an epoch is "bad" unless the loss beats the best seen so
/// far by at least `threshold`. After `patience` consecutive bad epochs the
/// rate is multiplied by `factor` and the count restarts.
class PlateauScheduler {
 public:
  PlateauScheduler() = default;
  PlateauScheduler(double initial_lr, PlateauConfig config) : lr_(initial_lr), config_(config) {}

  /// Feeds one epoch's monitored loss; returns the rate for the next epoch.
  double step(double loss);
  double lr() const { return lr_; }
  double best() const { return best_; }
  int bad_epochs() const { return bad_; }
  const PlateauConfig& config() const { return config_; }

  void restore(double lr, double best, int bad) {
    lr_ = lr;
    best_ = best;
    bad_ = bad;
  }

 private:
  double lr_ = 1e-3;
  PlateauConfig config_;
  double best_ = std::numeric_limits<double>::infinity();
  int bad_ = 0;
};

/// Replays a loss history through a fresh scheduler and returns the rate in
/// force after the last epoch.
double plateau_lr(std::span<const double> losses, double initial_lr, const PlateauConfig& config);

}  // namespace doorinet::nn
