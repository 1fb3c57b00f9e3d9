// SPDX-License-Identifier: Apache-2.0
#include "doorinet/nn/gru.hpp"

#include <cmath>

#include "doorinet/error.hpp"

namespace doorinet::nn {

namespace {

template <class Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& a) {
  using S = typename Derived::Scalar;
  return (S(1) + (-a).exp()).inverse();
}

}  // namespace

GruLayerParams GruLayerParams::zeros(Index input, Index hidden) {
  GruLayerParams p;
  for (Tensor2* m : {&p.W_r, &p.W_z, &p.W}) *m = Tensor2::Zero(hidden, input);
  for (Tensor2* m : {&p.U_r, &p.U_z, &p.U}) *m = Tensor2::Zero(hidden, hidden);
  for (Vector<double>* v : {&p.b_r, &p.b_z, &p.b}) *v = Vector<double>::Zero(hidden);
  return p;
}

GruLayerParams GruLayerParams::xavier(Index input, Index hidden, Rng& rng) {
  GruLayerParams p = zeros(input, hidden);
  for (Tensor2* m : {&p.W_r, &p.W_z, &p.W}) *m = xavier_init(hidden, input, rng);
  for (Tensor2* m : {&p.U_r, &p.U_z, &p.U}) *m = xavier_init(hidden, hidden, rng);
  return p;
}

void GruLayerParams::validate() const {
  const Index h = W.rows();
  const Index i = W.cols();
  const bool ok = W_r.rows() == h && W_z.rows() == h && W_r.cols() == i && W_z.cols() == i &&
                  U_r.rows() == h && U_r.cols() == h && U_z.rows() == h && U_z.cols() == h &&
                  U.rows() == h && U.cols() == h && b_r.size() == h && b_z.size() == h &&
                  b.size() == h;
  if (!ok) throw InvalidArgument("GruLayerParams: inconsistent shapes");
}

Vector<double> gru_cell(const GruLayerParams& p, const Vector<double>& x,
                        const Vector<double>& h_prev) {
  p.validate();
  if (x.size() != p.input_size() || h_prev.size() != p.hidden_size()) {
    throw InvalidArgument("gru_cell: dimension mismatch");
  }
  const Vector<double> r = sigmoid((p.W_r * x + p.U_r * h_prev + p.b_r).array()).matrix();
  const Vector<double> z = sigmoid((p.W_z * x + p.U_z * h_prev + p.b_z).array()).matrix();
  const Vector<double> n =
      (p.W * x + p.U * r.cwiseProduct(h_prev) + p.b).array().tanh().matrix();
  return (z.array() * h_prev.array() + (1.0 - z.array()) * n.array()).matrix();
}

void pack_gru(const GruLayerParams& p, const GruSlots& s, std::span<double> buffer) {
  p.validate();
  if (static_cast<std::size_t>(p.input_size()) != s.input ||
      static_cast<std::size_t>(p.hidden_size()) != s.hidden ||
      buffer.size() < s.bias + 3 * s.hidden) {
    throw InvalidArgument("pack_gru: shape does not match slots");
  }
  const Index h = p.hidden_size();
  const Index in = p.input_size();
  Eigen::Map<Matrix<double>> w_input(buffer.data() + s.w_input, 3 * h, in);
  Eigen::Map<Matrix<double>> w_rz(buffer.data() + s.w_hidden_rz, 2 * h, h);
  Eigen::Map<Matrix<double>> w_n(buffer.data() + s.w_hidden_n, h, h);
  Eigen::Map<Vector<double>> bias(buffer.data() + s.bias, 3 * h);
  w_input << p.W_r, p.W_z, p.W;
  w_rz << p.U_r, p.U_z;
  w_n = p.U;
  bias << p.b_r, p.b_z, p.b;
}

GruLayerParams unpack_gru(const double* buffer, const GruSlots& s) {
  const GruWeights<double> w(buffer, s);
  const Index h = w.hidden();
  GruLayerParams p;
  p.W_r = w.w_input.topRows(h);
  p.W_z = w.w_input.middleRows(h, h);
  p.W = w.w_input.bottomRows(h);
  p.U_r = w.w_hidden_rz.topRows(h);
  p.U_z = w.w_hidden_rz.bottomRows(h);
  p.U = w.w_hidden_n;
  p.b_r = w.bias.head(h);
  p.b_z = w.bias.segment(h, h);
  p.b = w.bias.tail(h);
  return p;
}

std::vector<Vector<double>> bigru_forward(const std::vector<BiGruLayerParams>& stack,
                                          const std::vector<Vector<double>>& xs) {
  if (xs.empty()) throw InvalidArgument("bigru_forward: empty sequence");
  if (stack.empty()) throw InvalidArgument("bigru_forward: empty layer stack");
  const Index steps = static_cast<Index>(xs.size());
  Matrix<double> seq(xs.front().size(), steps);
  for (Index t = 0; t < steps; ++t) {
    if (xs[t].size() != seq.rows()) throw InvalidArgument("bigru_forward: ragged sequence");
    seq.col(t) = xs[t];
  }
  for (const BiGruLayerParams& layer : stack) {
    if (layer.forward.input_size() != seq.rows() || layer.backward.input_size() != seq.rows()) {
      throw InvalidArgument("bigru_forward: layer input size mismatch");
    }
    const Index h = layer.forward.hidden_size();
    if (layer.backward.hidden_size() != h) {
      throw InvalidArgument("bigru_forward: direction hidden sizes differ");
    }
    GruSlots slots;
    slots.input = static_cast<std::size_t>(seq.rows());
    slots.hidden = static_cast<std::size_t>(h);
    slots.w_input = 0;
    slots.w_hidden_rz = slots.w_input + 3 * slots.hidden * slots.input;
    slots.w_hidden_n = slots.w_hidden_rz + 2 * slots.hidden * slots.hidden;
    slots.bias = slots.w_hidden_n + slots.hidden * slots.hidden;
    AlignedVector<double> fwd_buf(slots.bias + 3 * slots.hidden);
    AlignedVector<double> bwd_buf(fwd_buf.size());
    pack_gru(layer.forward, slots, fwd_buf);
    pack_gru(layer.backward, slots, bwd_buf);
    GruCache<double> fwd, bwd;
    gru_forward(GruWeights<double>(fwd_buf.data(), slots), seq, steps, false, fwd);
    gru_forward(GruWeights<double>(bwd_buf.data(), slots), seq, steps, true, bwd);
    Matrix<double> next(2 * h, steps);
    next << fwd.h, bwd.h;
    seq = std::move(next);
  }
  std::vector<Vector<double>> out(static_cast<std::size_t>(steps));
  for (Index t = 0; t < steps; ++t) out[t] = seq.col(t);
  return out;
}

template <class T>
GruWeights<T>::GruWeights(const T* base, const GruSlots& s)
    : w_input(base + s.w_input, 3 * s.hidden, s.input),
      w_hidden_rz(base + s.w_hidden_rz, 2 * s.hidden, s.hidden),
      w_hidden_n(base + s.w_hidden_n, s.hidden, s.hidden),
      bias(base + s.bias, 3 * s.hidden) {}

template <class T>
GruGrads<T>::GruGrads(T* base, const GruSlots& s)
    : w_input(base + s.w_input, 3 * s.hidden, s.input),
      w_hidden_rz(base + s.w_hidden_rz, 2 * s.hidden, s.hidden),
      w_hidden_n(base + s.w_hidden_n, s.hidden, s.hidden),
      bias(base + s.bias, 3 * s.hidden) {}

template <class T>
void gru_forward(const GruWeights<T>& w, const Matrix<T>& x, Index steps, bool reverse,
                 GruCache<T>& cache) {
  const Index hidden = w.hidden();
  const Index total = x.cols();
  const Index batch = total / steps;
  // Input projections for all steps in one product.
  Matrix<T> xg;
  xg.noalias() = w.w_input * x;
  xg.colwise() += w.bias;

  cache.h_prev.resize(hidden, total);
  cache.r.resize(hidden, total);
  cache.z.resize(hidden, total);
  cache.n.resize(hidden, total);
  cache.h.resize(hidden, total);

  Matrix<T> h = Matrix<T>::Zero(hidden, batch);
  Matrix<T> rz(2 * hidden, batch);
  Matrix<T> an(hidden, batch);
  for (Index k = 0; k < steps; ++k) {
    const Index t = reverse ? steps - 1 - k : k;
    const Index c0 = t * batch;
    cache.h_prev.middleCols(c0, batch) = h;

    rz.noalias() = w.w_hidden_rz * h;
    rz += xg.block(0, c0, 2 * hidden, batch);
    rz = sigmoid(rz.array()).matrix();
    auto r = cache.r.middleCols(c0, batch);
    auto z = cache.z.middleCols(c0, batch);
    r = rz.topRows(hidden);
    z = rz.bottomRows(hidden);

    an.noalias() = w.w_hidden_n * r.cwiseProduct(h);
    an += xg.block(2 * hidden, c0, hidden, batch);
    auto n = cache.n.middleCols(c0, batch);
    n = an.array().tanh().matrix();

    h = (z.array() * h.array() + (T(1) - z.array()) * n.array()).matrix();
    cache.h.middleCols(c0, batch) = h;
  }
}

template <class T>
void gru_backward(const GruWeights<T>& w, const Matrix<T>& x, Index steps, bool reverse,
                  const GruCache<T>& cache, const Matrix<T>& d_h, GruGrads<T>& grads,
                  Matrix<T>* d_x) {
  const Index hidden = w.hidden();
  const Index total = x.cols();
  const Index batch = total / steps;

  Matrix<T> da(3 * hidden, total);  // pre-activation gradients [r; z; n]
  Matrix<T> dh = Matrix<T>::Zero(hidden, batch);
  Matrix<T> dh_prev(hidden, batch);
  Matrix<T> d_rh(hidden, batch);
  for (Index k = steps - 1; k >= 0; --k) {
    const Index t = reverse ? steps - 1 - k : k;
    const Index c0 = t * batch;
    dh += d_h.middleCols(c0, batch);
    const auto hp = cache.h_prev.middleCols(c0, batch).array();
    const auto r = cache.r.middleCols(c0, batch).array();
    const auto z = cache.z.middleCols(c0, batch).array();
    const auto n = cache.n.middleCols(c0, batch).array();
    const auto g = dh.array();

    auto da_r = da.block(0, c0, hidden, batch);
    auto da_z = da.block(hidden, c0, hidden, batch);
    auto da_n = da.block(2 * hidden, c0, hidden, batch);

    da_n = (g * (T(1) - z) * (T(1) - n * n)).matrix();
    da_z = (g * (hp - n) * z * (T(1) - z)).matrix();
    d_rh.noalias() = w.w_hidden_n.transpose() * da_n;
    da_r = (d_rh.array() * hp * r * (T(1) - r)).matrix();

    dh_prev = (g * z + d_rh.array() * r).matrix();
    dh_prev.noalias() += w.w_hidden_rz.transpose() * da.block(0, c0, 2 * hidden, batch);
    dh.swap(dh_prev);
  }

  grads.w_input.noalias() += da * x.transpose();
  grads.bias += da.rowwise().sum();
  grads.w_hidden_rz.noalias() += da.topRows(2 * hidden) * cache.h_prev.transpose();
  const Matrix<T> rh = cache.r.cwiseProduct(cache.h_prev);
  grads.w_hidden_n.noalias() += da.bottomRows(hidden) * rh.transpose();
  if (d_x != nullptr) d_x->noalias() += w.w_input.transpose() * da;
}

template struct GruWeights<double>;
template struct GruWeights<float>;
template struct GruGrads<double>;
template struct GruGrads<float>;
template void gru_forward<double>(const GruWeights<double>&, const Matrix<double>&, Index, bool,
                                  GruCache<double>&);
template void gru_forward<float>(const GruWeights<float>&, const Matrix<float>&, Index, bool,
                                 GruCache<float>&);
template void gru_backward<double>(const GruWeights<double>&, const Matrix<double>&, Index, bool,
                                   const GruCache<double>&, const Matrix<double>&,
                                   GruGrads<double>&, Matrix<double>*);
template void gru_backward<float>(const GruWeights<float>&, const Matrix<float>&, Index, bool,
                                  const GruCache<float>&, const Matrix<float>&, GruGrads<float>&,
                                  Matrix<float>*);

}  // namespace doorinet::nn
