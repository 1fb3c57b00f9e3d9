// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "doorinet/nn/architecture.hpp"
#include "doorinet/nn/tensor.hpp"

namespace doorinet::nn {

/// Parameters of one GRU direction, gate by gate:
///   r  = sigmoid(W_r x + U_r h + b_r)
///   z  = sigmoid(W_z x + U_z h + b_z)
///   h~ = tanh(W x + U (r ⊙ h) + b)
///   h' = z ⊙ h + (1 - z) ⊙ h~
struct GruLayerParams {
  Tensor2 W_r, W_z, W;  // hidden x input
  Tensor2 U_r, U_z, U;  // hidden x hidden
  Vector<double> b_r, b_z, b;

  static GruLayerParams zeros(Index input, Index hidden);
  static GruLayerParams xavier(Index input, Index hidden, Rng& rng);
  Index input_size() const { return W.cols(); }
  Index hidden_size() const { return W.rows(); }
  void validate() const;
};

struct BiGruLayerParams {
  GruLayerParams forward;
  GruLayerParams backward;
};

/// Single GRU step for one sample.
Vector<double> gru_cell(const GruLayerParams& p, const Vector<double>& x,
                        const Vector<double>& h_prev);

/// Stacked bidirectional GRU over one sequence. Each output element is
/// [forward h_t ; backward h_t]. Runs on the batched kernel with batch 1.
std::vector<Vector<double>> bigru_forward(const std::vector<BiGruLayerParams>& stack,
                                          const std::vector<Vector<double>>& xs);

/// Writes `p` into `buffer` at the positions named by `slots`.
void pack_gru(const GruLayerParams& p, const GruSlots& slots, std::span<double> buffer);
GruLayerParams unpack_gru(const double* buffer, const GruSlots& slots);

// ---- batched kernel ----------------------------------------------------
// Sequences are stored as (features x steps*batch) matrices; column t*B + b
// holds time step t of sample b.

template <class T>
struct GruWeights {
  Eigen::Map<const Matrix<T>> w_input;
  Eigen::Map<const Matrix<T>> w_hidden_rz;
  Eigen::Map<const Matrix<T>> w_hidden_n;
  Eigen::Map<const Vector<T>> bias;

  GruWeights(const T* base, const GruSlots& s);
  Index hidden() const { return w_hidden_n.rows(); }
};

template <class T>
struct GruGrads {
  Eigen::Map<Matrix<T>> w_input;
  Eigen::Map<Matrix<T>> w_hidden_rz;
  Eigen::Map<Matrix<T>> w_hidden_n;
  Eigen::Map<Vector<T>> bias;

  GruGrads(T* base, const GruSlots& s);
};

template <class T>
struct GruCache {
  Matrix<T> h_prev;  // hidden state entering each step
  Matrix<T> r, z, n;
  Matrix<T> h;  // output hidden state of each step
};

/// Runs one direction. `reverse` processes steps T-1 .. 0.
template <class T>
void gru_forward(const GruWeights<T>& w, const Matrix<T>& x, Index steps, bool reverse,
                 GruCache<T>& cache);

/// Backpropagation through time for one direction. Accumulates parameter
/// gradients into `grads` and, when `d_x` is non-null, input gradients into
/// *d_x (which must already be sized).
template <class T>
void gru_backward(const GruWeights<T>& w, const Matrix<T>& x, Index steps, bool reverse,
                  const GruCache<T>& cache, const Matrix<T>& d_h, GruGrads<T>& grads,
                  Matrix<T>* d_x);

}  // namespace doorinet::nn
