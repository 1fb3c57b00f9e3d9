// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "doorinet/nn/network.hpp"
#include "doorinet/nn/optim.hpp"
#include "doorinet/window.hpp"

namespace doorinet::nn {

struct TrainConfig {
  int epochs = 150;
  double initial_lr = 1e-3;
  double lr_factor = 0.5;
  int plateau_patience = 3;
  double plateau_threshold = 0.01;
  double weight_decay = 1e-2;
  std::size_t batch_size = 64;
  std::uint64_t seed = 700;
  double dropout_p = 0.2;  // used when the architecture is built from this config
  std::size_t micro_batch = 64;

  /// Throws InvalidArgument naming the first bad field.
  void validate() const;
  AdamWConfig adamw() const;
  PlateauConfig plateau() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;  // rate used during this epoch
};

/// Everything needed to continue a run exactly where it stopped.
template <class T>
struct TrainState {
  int epochs_done = 0;
  std::vector<EpochRecord> history;
  AdamWState<T> adam;
  PlateauScheduler scheduler;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Shuffle order for `epoch` (1-based): a Fisher-Yates permutation of [0, n)
/// drawn from a stream keyed by (seed, epoch).
std::vector<std::size_t> epoch_order(std::uint64_t seed, int epoch, std::size_t n);

/// Minibatch AdamW on the Huber loss, stepping the plateau scheduler on the
/// validation loss after each epoch. Runs epochs state.epochs_done+1 ..
/// config.epochs; pass a restored state to resume. Deterministic for a given
/// seed, config and starting state.
template <class T>
TrainState<T> train(Network<T>& net, std::span<const WindowSample> train_set,
                    std::span<const WindowSample> val_set, const TrainConfig& config,
                    TrainState<T> state = {}, const EpochCallback& on_epoch = {});

}  // namespace doorinet::nn
