// SPDX-License-Identifier: Apache-2.0
#include "doorinet/nn/loss.hpp"

#include <cmath>

#include "doorinet/error.hpp"

namespace doorinet::nn {

namespace {

double huber_term(double r) {
  const double a = std::abs(r);
  return a < 1.0 ? 0.5 * r * r : a - 0.5;
}

}  // namespace

double huber_loss(std::span<const double> y, std::span<const double> y_hat) {
  if (y.empty()) throw InvalidArgument("huber_loss: empty input");
  if (y.size() != y_hat.size()) throw InvalidArgument("huber_loss: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += huber_term(y[i] - y_hat[i]);
  return sum / static_cast<double>(y.size());
}

double huber_derivative(double y, double y_hat) {
  const double r = y_hat - y;
  if (std::abs(r) < 1.0) return r;
  return r > 0.0 ? 1.0 : -1.0;
}

template <class T>
double huber_sum_and_grad(const Matrix<T>& pred, std::span<const double> target, double scale,
                          Matrix<T>& d_pred) {
  if (pred.rows() != 1 || static_cast<std::size_t>(pred.cols()) != target.size()) {
    throw InvalidArgument("huber_sum_and_grad: shape mismatch");
  }
  d_pred.resize(1, pred.cols());
  double sum = 0.0;
  for (Index b = 0; b < pred.cols(); ++b) {
    const double p = static_cast<double>(pred(0, b));
    sum += huber_term(target[b] - p);
    d_pred(0, b) = static_cast<T>(scale * huber_derivative(target[b], p));
  }
  return sum;
}

template double huber_sum_and_grad<double>(const Matrix<double>&, std::span<const double>, double,
                                           Matrix<double>&);
template double huber_sum_and_grad<float>(const Matrix<float>&, std::span<const double>, double,
                                          Matrix<float>&);

}  // namespace doorinet::nn
