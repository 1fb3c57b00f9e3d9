// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "doorinet/nn/architecture.hpp"
#include "doorinet/nn/gru.hpp"
#include "doorinet/nn/tensor.hpp"

namespace doorinet::nn {

/// Network inputs for a batch. Each channel is (3 x window_len*B) with column
/// t*B + b holding step t of sample b. Channels the architecture does not use
/// may be left empty.
template <class T>
struct Batch {
  Matrix<T> accel;
  Matrix<T> gyro;
  Index size = 0;

  const Matrix<T>& channel(Channel c) const { return c == Channel::accel ? accel : gyro; }
};

/// DoorINet network with all trainable values in one flat buffer laid out by
/// ParameterLayout. forward() is const and reentrant; training state lives
/// in the caller-owned Tape.
template <class T>
class Network {
 public:
  explicit Network(Architecture arch);

  /// Xavier-uniform weights (per gate for GRU matrices), zero biases.
  static Network initialized(Architecture arch, std::uint64_t seed);

  const Architecture& architecture() const { return arch_; }
  const ParameterLayout& layout() const { return layout_; }
  AlignedVector<T>& parameters() { return params_; }
  const AlignedVector<T>& parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  template <class U>
  Network<U> cast() const {
    Network<U> out(arch_);
    for (std::size_t i = 0; i < params_.size(); ++i) out.parameters()[i] = static_cast<U>(params_[i]);
    return out;
  }

  struct BiGruTape {
    Matrix<T> input;
    GruCache<T> fwd;
    GruCache<T> bwd;
  };
  struct FcTape {
    Matrix<T> input;
    Matrix<T> mask;  // scaled keep mask; empty when no dropout was applied
    Matrix<T> output;
  };
  struct Tape {
    Index batch = 0;
    std::vector<std::vector<BiGruTape>> heads;
    std::vector<BiGruTape> trunk;
    Index sequence_rows = 0;
    std::vector<FcTape> fc;
  };

  /// Returns predictions as a 1 x B row. With `dropout_rng` set, dropout
  /// masks are drawn from it (training mode); otherwise evaluation mode.
  /// When `tape` is non-null, activations needed by backward() are recorded.
  Matrix<T> forward(const Batch<T>& batch, Tape* tape = nullptr, Rng* dropout_rng = nullptr) const;

  /// Accumulates d(loss)/d(parameters) into `grad` given d(loss)/d(output).
  void backward(const Tape& tape, const Matrix<T>& d_out, std::span<T> grad) const;

 private:
  Matrix<T> bigru(const BiGruSlots& slots, const Matrix<T>& x, BiGruTape* tape) const;
  Matrix<T> bigru_backward(const BiGruSlots& slots, const BiGruTape& tape, const Matrix<T>& d_out,
                           std::span<T> grad, bool need_input_grad) const;

  Architecture arch_;
  ParameterLayout layout_;
  AlignedVector<T> params_;
};

extern template class Network<double>;
extern template class Network<float>;

}  // namespace doorinet::nn
