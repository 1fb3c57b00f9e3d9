// SPDX-License-Identifier: Apache-2.0
#include "doorinet/nn/optim.hpp"

#include <algorithm>
#include <cmath>

#include "doorinet/error.hpp"
#include "doorinet/nn/fpenv.hpp"

namespace doorinet::nn {

template <class T>
void adamw_step(std::span<T> params, std::span<const T> grads, AdamWState<T>& state, double lr,
                const AdamWConfig& config) {
  if (params.size() != grads.size()) throw InvalidArgument("adamw_step: gradient size mismatch");
  if (state.m.empty()) {
    state.m.assign(params.size(), T(0));
    state.v.assign(params.size(), T(0));
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw InvalidArgument("adamw_step: optimizer state size mismatch");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const T decay = static_cast<T>(1.0 - lr * config.weight_decay);
  const T b1 = static_cast<T>(config.beta1);
  const T b2 = static_cast<T>(config.beta2);
  const T step_size = static_cast<T>(lr / (1.0 - std::pow(config.beta1, t)));
  const T inv_bc2_sqrt = static_cast<T>(1.0 / std::sqrt(1.0 - std::pow(config.beta2, t)));
  const T eps = static_cast<T>(config.eps);
  T* p = params.data();
  const T* g = grads.data();
  T* m = state.m.data();
  T* v = state.v.data();
  const std::int64_t n = static_cast<std::int64_t>(params.size());
#pragma omp parallel
  {
    const FlushDenormals ftz;
#pragma omp for simd schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      p[i] *= decay;
      m[i] = b1 * m[i] + (T(1) - b1) * g[i];
      v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
      p[i] -= step_size * m[i] / (std::sqrt(v[i]) * inv_bc2_sqrt + eps);
    }
  }
}

template void adamw_step<double>(std::span<double>, std::span<const double>, AdamWState<double>&,
                                 double, const AdamWConfig&);
template void adamw_step<float>(std::span<float>, std::span<const float>, AdamWState<float>&,
                                double, const AdamWConfig&);

double PlateauScheduler::step(double loss) {
  // Relative slack keeps an improvement of exactly `threshold` from being
  // lost to rounding.
  const double slack = 1e-12 * std::max(1.0, std::abs(best_));
  if (loss <= best_ - config_.threshold + slack) {
    best_ = loss;
    bad_ = 0;
  } else {
    ++bad_;
  }
  if (bad_ >= config_.patience) {
    lr_ = std::max(config_.min_lr, lr_ * config_.factor);
    bad_ = 0;
  }
  return lr_;
}

double plateau_lr(std::span<const double> losses, double initial_lr, const PlateauConfig& config) {
  PlateauScheduler s(initial_lr, config);
  for (double l : losses) s.step(l);
  return s.lr();
}

}  // namespace doorinet::nn
