// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "doorinet/nn/loss.hpp"
#include "doorinet/nn/network.hpp"
#include "doorinet/nn/parallel.hpp"

namespace oracle {

using namespace doorinet;
using namespace doorinet::nn;

namespace {

double sig(double a) { return 1.0 / (1.0 + std::exp(-a)); }

double row_dot(const Tensor2& m, Index r, const std::vector<double>& v) {
  double s = 0.0;
  for (Index c = 0; c < m.cols(); ++c) s += m(r, c) * v[static_cast<std::size_t>(c)];
  return s;
}

}  // namespace

std::vector<double> gru_step(const GruLayerParams& p, const std::vector<double>& x,
                             const std::vector<double>& h) {
  const Index n_h = p.W.rows();
  std::vector<double> r(n_h), z(n_h), rh(n_h), out(n_h);
  for (Index i = 0; i < n_h; ++i) {
    r[i] = sig(row_dot(p.W_r, i, x) + row_dot(p.U_r, i, h) + p.b_r(i));
    z[i] = sig(row_dot(p.W_z, i, x) + row_dot(p.U_z, i, h) + p.b_z(i));
    rh[i] = r[i] * h[i];
  }
  for (Index i = 0; i < n_h; ++i) {
    const double cand = std::tanh(row_dot(p.W, i, x) + row_dot(p.U, i, rh) + p.b(i));
    out[i] = z[i] * h[i] + (1.0 - z[i]) * cand;
  }
  return out;
}

Seq bigru(const std::vector<BiGruLayerParams>& stack, const Seq& xs) {
  Seq seq = xs;
  for (const BiGruLayerParams& layer : stack) {
    const std::size_t n = seq.size();
    const std::size_t hdim = static_cast<std::size_t>(layer.forward.W.rows());
    Seq fwd(n), bwd(n);
    std::vector<double> h(hdim, 0.0);
    for (std::size_t t = 0; t < n; ++t) fwd[t] = h = gru_step(layer.forward, seq[t], h);
    h.assign(hdim, 0.0);
    for (std::size_t t = n; t-- > 0;) bwd[t] = h = gru_step(layer.backward, seq[t], h);
    Seq next(n);
    for (std::size_t t = 0; t < n; ++t) {
      next[t] = fwd[t];
      next[t].insert(next[t].end(), bwd[t].begin(), bwd[t].end());
    }
    seq = std::move(next);
  }
  return seq;
}

GruLayerParams random_gru(std::size_t input, std::size_t hidden, std::uint64_t seed, double scale) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  GruLayerParams p = GruLayerParams::zeros(static_cast<Index>(input), static_cast<Index>(hidden));
  for (Tensor2* m : {&p.W_r, &p.W_z, &p.W, &p.U_r, &p.U_z, &p.U}) {
    for (Index i = 0; i < m->size(); ++i) m->data()[i] = u(gen);
  }
  for (Vector<double>* v : {&p.b_r, &p.b_z, &p.b}) {
    for (Index i = 0; i < v->size(); ++i) (*v)(i) = u(gen);
  }
  return p;
}

std::vector<WindowSample> random_windows(std::size_t count, std::size_t len, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<WindowSample> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    WindowSample& w = out[k];
    for (std::size_t t = 0; t < len; ++t) {
      w.gyro.push_back({0.3 * n(gen), 0.3 * n(gen), 0.8 * n(gen)});
      w.accel.push_back({0.5 * n(gen), 0.5 * n(gen), 1.0 + 0.3 * n(gen)});
    }
    w.target_deg = 1.5 * n(gen);
    w.experiment = "e" + std::to_string(k);
  }
  return out;
}

std::vector<GroupError> gradient_check(const Architecture& arch, std::uint64_t seed, double eps,
                                       std::size_t batch, double floor) {
  Network<double> net = Network<double>::initialized(arch, seed);
  // Nonzero biases so their gradients are exercised away from the init point.
  std::mt19937_64 gen(seed ^ 0x5eedULL);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (const TensorSlot& s : net.layout().tensors()) {
    if (!s.is_bias) continue;
    for (std::size_t i = 0; i < s.size(); ++i) net.parameters()[s.offset + i] = u(gen);
  }
  const std::vector<WindowSample> windows = random_windows(batch, arch.window_len, seed + 1);
  std::vector<std::size_t> idx(batch);
  for (std::size_t i = 0; i < batch; ++i) idx[i] = i;
  const std::uint64_t key = 12345;

  std::vector<double> analytic(net.parameter_count());
  batch_gradient_serial(net, std::span<const WindowSample>(windows), idx, key, batch, true,
                        std::span<double>(analytic));

  const Batch<double> b = make_batch<double>(arch, windows);
  std::vector<double> target;
  for (const WindowSample& w : windows) target.push_back(w.target_deg);
  auto loss = [&]() {
    Rng rng = Rng::derive(key, 0);
    const Matrix<double> pred = net.forward(b, nullptr, &rng);
    std::vector<double> p(pred.data(), pred.data() + pred.size());
    return huber_loss(target, p);
  };

  std::vector<GroupError> out;
  for (const TensorSlot& s : net.layout().tensors()) {
    GroupError g;
    g.name = s.name;
    for (std::size_t i = 0; i < s.size(); ++i) {
      double& p = net.parameters()[s.offset + i];
      const double saved = p;
      p = saved + eps;
      const double lp = loss();
      p = saved - eps;
      const double lm = loss();
      p = saved;
      const double numeric = (lp - lm) / (2.0 * eps);
      const double a = analytic[s.offset + i];
      const double diff = std::abs(a - numeric);
      g.max_abs = std::max(g.max_abs, diff);
      g.max_rel = std::max(g.max_rel, diff / std::max({std::abs(a), std::abs(numeric), floor}));
      g.grad_scale = std::max(g.grad_scale, std::abs(numeric));
    }
    out.push_back(g);
  }
  return out;
}

Architecture shrunk_g() { return resized(g_doorinet(), 5, 4, 8, {16, 12, 10, 8, 6, 4, 3, 1}); }
Architecture shrunk_ag() { return resized(ag_doorinet(), 5, 4, 8, {16, 12, 10, 8, 6, 4, 3, 1}); }

double rmse(const std::vector<double>& y, const std::vector<double>& yh) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - yh[i]) * (y[i] - yh[i]);
  return std::sqrt(s / static_cast<double>(y.size()));
}

double lpd(const std::vector<double>& y, const std::vector<double>& yh) {
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    a += y[i];
    b += yh[i];
  }
  return std::abs(a - b);
}

double mad(const std::vector<double>& y, const std::vector<double>& yh) {
  // Quadratic rescan of every prefix.
  double best = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
      a += y[i];
      b += yh[i];
    }
    best = std::max(best, std::abs(a - b));
  }
  return best;
}

}  // namespace oracle
