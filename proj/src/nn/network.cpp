// SPDX-License-Identifier: Apache-2.0
#include "doorinet/nn/network.hpp"

#include "doorinet/error.hpp"

namespace doorinet::nn {

template <class T>
Network<T>::Network(Architecture arch)
    : arch_(std::move(arch)), layout_(arch_), params_(layout_.size(), T(0)) {}

template <class T>
Network<T> Network<T>::initialized(Architecture arch, std::uint64_t seed) {
  Network<double> net(std::move(arch));
  Rng rng(seed);
  AlignedVector<double>& buf = net.parameters();
  auto init_bigru = [&](const BiGruSlots& s) {
    for (const GruSlots* dir : {&s.forward, &s.backward}) {
      const GruLayerParams p = GruLayerParams::xavier(static_cast<Index>(dir->input),
                                                      static_cast<Index>(dir->hidden), rng);
      pack_gru(p, *dir, buf);
    }
  };
  for (const auto& head : net.layout().heads()) {
    for (const BiGruSlots& s : head) init_bigru(s);
  }
  for (const BiGruSlots& s : net.layout().trunk()) init_bigru(s);
  for (const FcSlots& f : net.layout().fc()) {
    Eigen::Map<Matrix<double>>(buf.data() + f.weight, f.out, f.in) =
        xavier_init(static_cast<Index>(f.out), static_cast<Index>(f.in), rng);
  }
  if constexpr (std::is_same_v<T, double>) {
    return net;
  } else {
    return net.template cast<T>();
  }
}

template <class T>
Matrix<T> Network<T>::bigru(const BiGruSlots& slots, const Matrix<T>& x, BiGruTape* tape) const {
  const Index steps = static_cast<Index>(arch_.window_len);
  GruCache<T> local_fwd, local_bwd;
  GruCache<T>& fwd = tape ? tape->fwd : local_fwd;
  GruCache<T>& bwd = tape ? tape->bwd : local_bwd;
  gru_forward(GruWeights<T>(params_.data(), slots.forward), x, steps, false, fwd);
  gru_forward(GruWeights<T>(params_.data(), slots.backward), x, steps, true, bwd);
  Matrix<T> out(fwd.h.rows() + bwd.h.rows(), x.cols());
  out << fwd.h, bwd.h;
  if (tape) tape->input = x;
  return out;
}

template <class T>
Matrix<T> Network<T>::forward(const Batch<T>& batch, Tape* tape, Rng* dropout_rng) const {
  const Index steps = static_cast<Index>(arch_.window_len);
  const Index b = batch.size;
  if (b <= 0) throw InvalidArgument("Network::forward: empty batch");
  if (tape) {
    *tape = Tape{};
    tape->batch = b;
    tape->heads.resize(arch_.heads.size());
  }

  std::vector<Matrix<T>> head_out;
  for (std::size_t k = 0; k < arch_.heads.size(); ++k) {
    const Matrix<T>& input = batch.channel(arch_.heads[k].channel);
    if (input.rows() != static_cast<Index>(arch_.input_size) || input.cols() != steps * b) {
      throw InvalidArgument("Network::forward: channel '" + to_string(arch_.heads[k].channel) +
                            "' has the wrong shape");
    }
    Matrix<T> seq = input;
    for (const BiGruSlots& slots : layout_.heads()[k]) {
      BiGruTape* lt = nullptr;
      if (tape) lt = &tape->heads[k].emplace_back();
      seq = bigru(slots, seq, lt);
    }
    head_out.push_back(std::move(seq));
  }

  Matrix<T> seq;
  if (head_out.size() == 1) {
    seq = std::move(head_out.front());
  } else {
    seq.resize(static_cast<Index>(arch_.head_concat_width()), steps * b);
    Index row = 0;
    for (const Matrix<T>& h : head_out) {
      seq.middleRows(row, h.rows()) = h;
      row += h.rows();
    }
  }
  for (const BiGruSlots& slots : layout_.trunk()) {
    BiGruTape* lt = nullptr;
    if (tape) lt = &tape->trunk.emplace_back();
    seq = bigru(slots, seq, lt);
  }

  // Timestep-major flatten: rows [t*F, (t+1)*F) hold step t.
  const Index features = seq.rows();
  Matrix<T> act(features * steps, b);
  for (Index t = 0; t < steps; ++t) act.middleRows(t * features, features) = seq.middleCols(t * b, b);
  if (tape) tape->sequence_rows = features;

  for (std::size_t i = 0; i < arch_.fc.size(); ++i) {
    const FcSlots& s = layout_.fc()[i];
    const FcSpec& spec = arch_.fc[i];
    Eigen::Map<const Matrix<T>> w(params_.data() + s.weight, s.out, s.in);
    Eigen::Map<const Vector<T>> bias(params_.data() + s.bias, s.out);
    Matrix<T> out;
    out.noalias() = w * act;
    out.colwise() += bias;
    Matrix<T> mask;
    if (dropout_rng != nullptr && spec.dropout > 0.0) {
      const T keep_scale = static_cast<T>(1.0 / (1.0 - spec.dropout));
      mask.resize(out.rows(), out.cols());
      for (Index c = 0; c < mask.cols(); ++c) {
        for (Index r = 0; r < mask.rows(); ++r) {
          mask(r, c) = dropout_rng->uniform() < spec.dropout ? T(0) : keep_scale;
        }
      }
      out.array() *= mask.array();
    }
    if (spec.tanh) out = out.array().tanh().matrix();
    if (tape) {
      FcTape& ft = tape->fc.emplace_back();
      ft.input = std::move(act);
      ft.mask = std::move(mask);
      ft.output = out;
    }
    act = std::move(out);
  }
  return act;
}

template <class T>
Matrix<T> Network<T>::bigru_backward(const BiGruSlots& slots, const BiGruTape& tape,
                                     const Matrix<T>& d_out, std::span<T> grad,
                                     bool need_input_grad) const {
  const Index steps = static_cast<Index>(arch_.window_len);
  const Index hidden = static_cast<Index>(slots.forward.hidden);
  Matrix<T> d_x;
  if (need_input_grad) d_x = Matrix<T>::Zero(tape.input.rows(), tape.input.cols());
  Matrix<T>* dx_ptr = need_input_grad ? &d_x : nullptr;
  GruGrads<T> gf(grad.data(), slots.forward);
  GruGrads<T> gb(grad.data(), slots.backward);
  const Matrix<T> d_fwd = d_out.topRows(hidden);
  const Matrix<T> d_bwd = d_out.bottomRows(hidden);
  gru_backward(GruWeights<T>(params_.data(), slots.forward), tape.input, steps, false, tape.fwd,
               d_fwd, gf, dx_ptr);
  gru_backward(GruWeights<T>(params_.data(), slots.backward), tape.input, steps, true, tape.bwd,
               d_bwd, gb, dx_ptr);
  return d_x;
}

template <class T>
void Network<T>::backward(const Tape& tape, const Matrix<T>& d_out, std::span<T> grad) const {
  if (grad.size() != params_.size()) throw InvalidArgument("Network::backward: gradient size");
  const Index steps = static_cast<Index>(arch_.window_len);
  const Index b = tape.batch;
  Matrix<T> d = d_out;
  for (std::size_t i = arch_.fc.size(); i-- > 0;) {
    const FcSlots& s = layout_.fc()[i];
    const FcTape& ft = tape.fc[i];
    if (arch_.fc[i].tanh) d.array() *= (T(1) - ft.output.array().square());
    if (ft.mask.size() > 0) d.array() *= ft.mask.array();
    Eigen::Map<Matrix<T>> gw(grad.data() + s.weight, s.out, s.in);
    Eigen::Map<Vector<T>> gbias(grad.data() + s.bias, s.out);
    gw.noalias() += d * ft.input.transpose();
    gbias += d.rowwise().sum();
    Eigen::Map<const Matrix<T>> w(params_.data() + s.weight, s.out, s.in);
    Matrix<T> d_in;
    d_in.noalias() = w.transpose() * d;
    d = std::move(d_in);
  }

  const Index features = tape.sequence_rows;
  Matrix<T> d_seq(features, steps * b);
  for (Index t = 0; t < steps; ++t) d_seq.middleCols(t * b, b) = d.middleRows(t * features, features);

  for (std::size_t l = layout_.trunk().size(); l-- > 0;) {
    d_seq = bigru_backward(layout_.trunk()[l], tape.trunk[l], d_seq, grad, true);
  }

  Index row = 0;
  for (std::size_t k = 0; k < arch_.heads.size(); ++k) {
    const auto& layers = layout_.heads()[k];
    const Index width = static_cast<Index>(2 * arch_.heads[k].hidden.back());
    Matrix<T> dh = d_seq.middleRows(row, width);
    row += width;
    for (std::size_t l = layers.size(); l-- > 0;) {
      dh = bigru_backward(layers[l], tape.heads[k][l], dh, grad, l > 0);
    }
  }
}

template class Network<double>;
template class Network<float>;

}  // namespace doorinet::nn
