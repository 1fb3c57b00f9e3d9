// SPDX-License-Identifier: Apache-2.0
#include "doorinet/nn/parallel.hpp"

#include <algorithm>
#include <numeric>

#include "doorinet/error.hpp"
#include "doorinet/nn/fpenv.hpp"
#include "doorinet/nn/loss.hpp"

namespace doorinet::nn {

template <class T>
Batch<T> make_batch(const Architecture& arch, std::span<const WindowSample> windows,
                    std::span<const std::size_t> indices) {
  const Index steps = static_cast<Index>(arch.window_len);
  const Index b = static_cast<Index>(indices.size());
  bool want_accel = false, want_gyro = false;
  for (const HeadSpec& h : arch.heads) {
    (h.channel == Channel::accel ? want_accel : want_gyro) = true;
  }
  Batch<T> out;
  out.size = b;
  if (want_accel) out.accel.resize(3, steps * b);
  if (want_gyro) out.gyro.resize(3, steps * b);
  for (Index j = 0; j < b; ++j) {
    const std::size_t i = indices[j];
    if (i >= windows.size()) throw InvalidArgument("make_batch: index out of range");
    const WindowSample& w = windows[i];
    if (static_cast<Index>(w.gyro.size()) != steps || static_cast<Index>(w.accel.size()) != steps) {
      throw InvalidArgument("make_batch: window " + std::to_string(i) + " has " +
                            std::to_string(w.gyro.size()) + " rows, expected " +
                            std::to_string(steps));
    }
    for (Index t = 0; t < steps; ++t) {
      const Index col = t * b + j;
      if (want_gyro) {
        out.gyro(0, col) = static_cast<T>(w.gyro[t].x);
        out.gyro(1, col) = static_cast<T>(w.gyro[t].y);
        out.gyro(2, col) = static_cast<T>(w.gyro[t].z);
      }
      if (want_accel) {
        out.accel(0, col) = static_cast<T>(w.accel[t].x);
        out.accel(1, col) = static_cast<T>(w.accel[t].y);
        out.accel(2, col) = static_cast<T>(w.accel[t].z);
      }
    }
  }
  return out;
}

template <class T>
Batch<T> make_batch(const Architecture& arch, std::span<const WindowSample> windows) {
  std::vector<std::size_t> idx(windows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return make_batch<T>(arch, windows, idx);
}

template <class T>
std::vector<double> predict(const Network<T>& net, std::span<const WindowSample> windows,
                            std::size_t chunk) {
  chunk = std::max<std::size_t>(chunk, 1);
  std::vector<double> out(windows.size());
  const FlushDenormals ftz;
  const std::int64_t n_chunks = static_cast<std::int64_t>((windows.size() + chunk - 1) / chunk);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    const FlushDenormals thread_ftz;
    const std::size_t begin = static_cast<std::size_t>(c) * chunk;
    const std::size_t end = std::min(windows.size(), begin + chunk);
    const Batch<T> batch = make_batch<T>(net.architecture(), windows.subspan(begin, end - begin));
    const Matrix<T> y = net.forward(batch);
    for (std::size_t i = begin; i < end; ++i) out[i] = static_cast<double>(y(0, i - begin));
  }
  return out;
}

template <class T>
double mean_loss(const Network<T>& net, std::span<const WindowSample> windows, std::size_t chunk) {
  if (windows.empty()) throw InvalidArgument("mean_loss: no windows");
  const std::vector<double> pred = predict(net, windows, chunk);
  std::vector<double> target(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) target[i] = windows[i].target_deg;
  return huber_loss(target, pred);
}

namespace {

template <class T>
double micro_gradient(const Network<T>& net, std::span<const WindowSample> windows,
                      std::span<const std::size_t> indices, std::uint64_t dropout_key,
                      std::size_t micro_index, double scale, bool training, std::span<T> grad) {
  const FlushDenormals ftz;
  std::fill(grad.begin(), grad.end(), T(0));
  const Batch<T> batch = make_batch<T>(net.architecture(), windows, indices);
  std::vector<double> target(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) target[i] = windows[indices[i]].target_deg;
  typename Network<T>::Tape tape;
  Rng rng = Rng::derive(dropout_key, micro_index);
  const Matrix<T> pred = net.forward(batch, &tape, training ? &rng : nullptr);
  Matrix<T> d_pred;
  const double sum = huber_sum_and_grad(pred, target, scale, d_pred);
  net.backward(tape, d_pred, grad);
  return sum;
}

void check_batch(std::size_t params, std::size_t grad, std::size_t batch) {
  if (grad != params) throw InvalidArgument("batch_gradient: gradient buffer size mismatch");
  if (batch == 0) throw InvalidArgument("batch_gradient: empty batch");
}

}  // namespace

template <class T>
double batch_gradient(const Network<T>& net, std::span<const WindowSample> windows,
                      std::span<const std::size_t> indices, std::uint64_t dropout_key,
                      std::size_t micro_batch, bool training, std::span<T> grad) {
  check_batch(net.parameter_count(), grad.size(), indices.size());
  micro_batch = std::max<std::size_t>(micro_batch, 1);
  const std::size_t n_micro = (indices.size() + micro_batch - 1) / micro_batch;
  if (n_micro == 1) return batch_gradient_serial(net, windows, indices, dropout_key, micro_batch, training, grad);

  const double scale = 1.0 / static_cast<double>(indices.size());
  std::vector<AlignedVector<T>> partial(n_micro);
  std::vector<double> sums(n_micro, 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t j = 0; j < static_cast<std::int64_t>(n_micro); ++j) {
    const std::size_t begin = static_cast<std::size_t>(j) * micro_batch;
    const std::size_t len = std::min(micro_batch, indices.size() - begin);
    partial[j].resize(grad.size());
    sums[j] = micro_gradient(net, windows, indices.subspan(begin, len), dropout_key,
                             static_cast<std::size_t>(j), scale, training, std::span<T>(partial[j]));
  }
  // Fixed left-to-right order per element, matching the serial path.
  const std::int64_t n = static_cast<std::int64_t>(grad.size());
#pragma omp parallel
  {
    const FlushDenormals thread_ftz;
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      T acc = partial[0][i];
      for (std::size_t j = 1; j < n_micro; ++j) acc += partial[j][i];
      grad[i] = acc;
    }
  }
  double total = 0.0;
  for (double s : sums) total += s;
  return total * scale;
}

template <class T>
double batch_gradient_serial(const Network<T>& net, std::span<const WindowSample> windows,
                             std::span<const std::size_t> indices, std::uint64_t dropout_key,
                             std::size_t micro_batch, bool training, std::span<T> grad) {
  check_batch(net.parameter_count(), grad.size(), indices.size());
  micro_batch = std::max<std::size_t>(micro_batch, 1);
  const std::size_t n_micro = (indices.size() + micro_batch - 1) / micro_batch;
  const double scale = 1.0 / static_cast<double>(indices.size());
  // Backprop writes into an aligned scratch buffer so rounding does not
  // depend on where the caller's buffer lives.
  AlignedVector<T> scratch(grad.size());
  const FlushDenormals ftz;
  double total = 0.0;
  for (std::size_t j = 0; j < n_micro; ++j) {
    const std::size_t begin = j * micro_batch;
    const std::size_t len = std::min(micro_batch, indices.size() - begin);
    total += micro_gradient(net, windows, indices.subspan(begin, len), dropout_key, j, scale,
                            training, std::span<T>(scratch));
    if (j == 0) {
      std::copy(scratch.begin(), scratch.end(), grad.begin());
    } else {
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += scratch[i];
    }
  }
  return total * scale;
}

#define DOORINET_INSTANTIATE(T)                                                                  \
  template Batch<T> make_batch<T>(const Architecture&, std::span<const WindowSample>,            \
                                  std::span<const std::size_t>);                                 \
  template Batch<T> make_batch<T>(const Architecture&, std::span<const WindowSample>);           \
  template std::vector<double> predict<T>(const Network<T>&, std::span<const WindowSample>,      \
                                          std::size_t);                                          \
  template double mean_loss<T>(const Network<T>&, std::span<const WindowSample>, std::size_t);   \
  template double batch_gradient<T>(const Network<T>&, std::span<const WindowSample>,            \
                                    std::span<const std::size_t>, std::uint64_t, std::size_t,    \
                                    bool, std::span<T>);                                         \
  template double batch_gradient_serial<T>(const Network<T>&, std::span<const WindowSample>,     \
                                           std::span<const std::size_t>, std::uint64_t,          \
                                           std::size_t, bool, std::span<T>);

DOORINET_INSTANTIATE(double)
DOORINET_INSTANTIATE(float)

}  // namespace doorinet::nn
