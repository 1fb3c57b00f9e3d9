// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "doorinet/nn/architecture.hpp"
#include "doorinet/window.hpp"

/// Plain single-threaded network evaluation with scalar loops, one window at
/// a time. Used to cross-check and benchmark the batched OpenMP kernels.
namespace doorinet::reference {

/// Inference-mode output for one window. `params` uses ParameterLayout.
double forward(const nn::Architecture& arch, std::span<const double> params,
               const WindowSample& window);

std::vector<double> predict(const nn::Architecture& arch, std::span<const double> params,
                            std::span<const WindowSample> windows);

}  // namespace doorinet::reference
