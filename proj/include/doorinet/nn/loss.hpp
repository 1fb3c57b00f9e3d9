// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "doorinet/nn/tensor.hpp"

namespace doorinet::nn {

/// Huber loss with delta = 1, averaged over elements:
/// l = 0.5 r^2 when |r| < 1, |r| - 0.5 otherwise, r = y - y_hat.
double huber_loss(std::span<const double> y, std::span<const double> y_hat);

/// Derivative of one element's loss with respect to y_hat.
double huber_derivative(double y, double y_hat);

/// Mean Huber loss of a 1 x B prediction row. Writes d(loss * scale)/d(pred)
/// into d_pred, where scale lets callers split a batch into pieces whose
/// gradients sum to the full-batch mean. Returns the unscaled sum of losses.
template <class T>
double huber_sum_and_grad(const Matrix<T>& pred, std::span<const double> target, double scale,
                          Matrix<T>& d_pred);

}  // namespace doorinet::nn
