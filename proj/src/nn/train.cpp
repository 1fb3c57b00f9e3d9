// SPDX-License-Identifier: Apache-2.0
#include "doorinet/nn/train.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "doorinet/error.hpp"
#include "doorinet/nn/parallel.hpp"

namespace doorinet::nn {

namespace {

constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kDropoutStream = 2;

void require(bool ok, const char* field, const std::string& why) {
  if (!ok) throw InvalidArgument(std::string("TrainConfig.") + field + ": " + why);
}

}  // namespace

void TrainConfig::validate() const {
  require(epochs > 0, "epochs", "must be positive");
  require(initial_lr > 0.0 && std::isfinite(initial_lr), "initial_lr", "must be positive");
  require(lr_factor > 0.0 && lr_factor < 1.0, "lr_factor", "must lie in (0, 1)");
  require(plateau_patience > 0, "plateau_patience", "must be positive");
  require(plateau_threshold >= 0.0, "plateau_threshold", "must be nonnegative");
  require(weight_decay >= 0.0, "weight_decay", "must be nonnegative");
  require(batch_size > 0, "batch_size", "must be positive");
  require(dropout_p >= 0.0 && dropout_p < 1.0, "dropout_p", "must lie in [0, 1)");
  require(micro_batch > 0, "micro_batch", "must be positive");
}

AdamWConfig TrainConfig::adamw() const {
  AdamWConfig c;
  c.weight_decay = weight_decay;
  return c;
}

PlateauConfig TrainConfig::plateau() const {
  PlateauConfig c;
  c.factor = lr_factor;
  c.patience = plateau_patience;
  c.threshold = plateau_threshold;
  return c;
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, int epoch, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::derive(seed, kShuffleStream, static_cast<std::uint64_t>(epoch));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

template <class T>
TrainState<T> train(Network<T>& net, std::span<const WindowSample> train_set,
                    std::span<const WindowSample> val_set, const TrainConfig& config,
                    TrainState<T> state, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw InvalidArgument("train: training set is empty");
  if (val_set.empty()) throw InvalidArgument("train: validation set is empty");
  if (state.epochs_done == 0) {
    state.history.clear();
    state.adam = {};
    state.scheduler = PlateauScheduler(config.initial_lr, config.plateau());
  }
  const AdamWConfig adamw = config.adamw();
  std::vector<T> grad(net.parameter_count());

  for (int epoch = state.epochs_done + 1; epoch <= config.epochs; ++epoch) {
    const double lr = state.scheduler.lr();
    const std::vector<std::size_t> order = epoch_order(config.seed, epoch, train_set.size());
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
      const std::size_t len = std::min(config.batch_size, order.size() - begin);
      const std::span<const std::size_t> idx(order.data() + begin, len);
      const std::uint64_t key = Rng::derive(config.seed, kDropoutStream,
                                            static_cast<std::uint64_t>(epoch), batch_index)
                                    .next();
      const double loss =
          batch_gradient(net, train_set, idx, key, config.micro_batch, true, std::span<T>(grad));
      loss_sum += loss * static_cast<double>(len);
      adamw_step(std::span<T>(net.parameters()), std::span<const T>(grad), state.adam, lr, adamw);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    rec.val_loss = mean_loss(net, val_set);
    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss)) {
      throw Error("train: loss became non-finite at epoch " + std::to_string(epoch));
    }
    state.scheduler.step(rec.val_loss);
    state.history.push_back(rec);
    state.epochs_done = epoch;
    if (on_epoch) on_epoch(rec);
  }
  return state;
}

template TrainState<double> train<double>(Network<double>&, std::span<const WindowSample>,
                                          std::span<const WindowSample>, const TrainConfig&,
                                          TrainState<double>, const EpochCallback&);
template TrainState<float> train<float>(Network<float>&, std::span<const WindowSample>,
                                        std::span<const WindowSample>, const TrainConfig&,
                                        TrainState<float>, const EpochCallback&);

}  // namespace doorinet::nn
