// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "doorinet/nn/network.hpp"
#include "doorinet/window.hpp"

namespace doorinet::nn {

/// Packs the selected windows into network input layout. Throws when a
/// window's length differs from the architecture's.
template <class T>
Batch<T> make_batch(const Architecture& arch, std::span<const WindowSample> windows,
                    std::span<const std::size_t> indices);

/// All windows in order.
template <class T>
Batch<T> make_batch(const Architecture& arch, std::span<const WindowSample> windows);

/// Evaluation-mode predictions, one per window, in degrees. Chunks of
/// `chunk` windows are processed in parallel; output does not depend on the
/// thread count.
template <class T>
std::vector<double> predict(const Network<T>& net, std::span<const WindowSample> windows,
                            std::size_t chunk = 64);

/// Evaluation-mode mean Huber loss over all windows.
template <class T>
double mean_loss(const Network<T>& net, std::span<const WindowSample> windows,
                 std::size_t chunk = 64);

/// Mean Huber loss of the batch `indices` and its gradient, written (not
/// accumulated) into `grad`. The batch is split into micro-batches of
/// `micro_batch` windows that run in parallel, each with its own dropout
/// stream derived from `dropout_key`; partial gradients are summed in
/// micro-batch order, so the result is identical for any thread count.
/// `training` selects dropout on (true) or off.
template <class T>
double batch_gradient(const Network<T>& net, std::span<const WindowSample> windows,
                      std::span<const std::size_t> indices, std::uint64_t dropout_key,
                      std::size_t micro_batch, bool training, std::span<T> grad);

/// Same contract as batch_gradient, computed on the calling thread only.
template <class T>
double batch_gradient_serial(const Network<T>& net, std::span<const WindowSample> windows,
                             std::span<const std::size_t> indices, std::uint64_t dropout_key,
                             std::size_t micro_batch, bool training, std::span<T> grad);

}  // namespace doorinet::nn
