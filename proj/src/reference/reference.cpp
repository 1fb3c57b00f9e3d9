// SPDX-License-Identifier: Apache-2.0
#include "doorinet/reference.hpp"

#include <cmath>

#include "doorinet/error.hpp"

namespace doorinet::reference {

namespace {

using Seq = std::vector<std::vector<double>>;  // [step][feature]

// Column-major element (r, c) of a rows x cols tensor.
double at(std::span<const double> p, std::size_t offset, std::size_t rows, std::size_t r,
          std::size_t c) {
  return p[offset + r + c * rows];
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Seq gru(std::span<const double> p, const nn::GruSlots& s, const Seq& xs, bool reverse) {
  const std::size_t H = s.hidden, I = s.input, T = xs.size();
  Seq out(T, std::vector<double>(H));
  std::vector<double> h(H, 0.0), r(H), z(H);
  for (std::size_t k = 0; k < T; ++k) {
    const std::size_t t = reverse ? T - 1 - k : k;
    const std::vector<double>& x = xs[t];
    for (std::size_t i = 0; i < H; ++i) {
      double ar = p[s.bias + i], az = p[s.bias + H + i];
      for (std::size_t j = 0; j < I; ++j) {
        ar += at(p, s.w_input, 3 * H, i, j) * x[j];
        az += at(p, s.w_input, 3 * H, H + i, j) * x[j];
      }
      for (std::size_t j = 0; j < H; ++j) {
        ar += at(p, s.w_hidden_rz, 2 * H, i, j) * h[j];
        az += at(p, s.w_hidden_rz, 2 * H, H + i, j) * h[j];
      }
      r[i] = sigmoid(ar);
      z[i] = sigmoid(az);
    }
    std::vector<double> next(H);
    for (std::size_t i = 0; i < H; ++i) {
      double an = p[s.bias + 2 * H + i];
      for (std::size_t j = 0; j < I; ++j) an += at(p, s.w_input, 3 * H, 2 * H + i, j) * x[j];
      for (std::size_t j = 0; j < H; ++j) an += at(p, s.w_hidden_n, H, i, j) * r[j] * h[j];
      next[i] = z[i] * h[i] + (1.0 - z[i]) * std::tanh(an);
    }
    h = next;
    out[t] = h;
  }
  return out;
}

Seq bigru(std::span<const double> p, const nn::BiGruSlots& s, const Seq& xs) {
  const Seq f = gru(p, s.forward, xs, false);
  const Seq b = gru(p, s.backward, xs, true);
  Seq out(xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t) {
    out[t] = f[t];
    out[t].insert(out[t].end(), b[t].begin(), b[t].end());
  }
  return out;
}

}  // namespace

double forward(const nn::Architecture& arch, std::span<const double> params,
               const WindowSample& window) {
  const nn::ParameterLayout layout(arch);
  if (params.size() != layout.size()) throw InvalidArgument("reference::forward: parameter count mismatch");
  const std::size_t T = arch.window_len;
  if (window.gyro.size() != T || window.accel.size() != T) {
    throw InvalidArgument("reference::forward: window length mismatch");
  }

  Seq seq(T);
  for (std::size_t k = 0; k < arch.heads.size(); ++k) {
    Seq h(T);
    for (std::size_t t = 0; t < T; ++t) {
      if (arch.heads[k].channel == nn::Channel::gyro) {
        h[t] = {window.gyro[t].x, window.gyro[t].y, window.gyro[t].z};
      } else {
        h[t] = {window.accel[t].x, window.accel[t].y, window.accel[t].z};
      }
    }
    for (const nn::BiGruSlots& s : layout.heads()[k]) h = bigru(params, s, h);
    for (std::size_t t = 0; t < T; ++t) seq[t].insert(seq[t].end(), h[t].begin(), h[t].end());
  }
  for (const nn::BiGruSlots& s : layout.trunk()) seq = bigru(params, s, seq);

  std::vector<double> act;
  for (const std::vector<double>& step : seq) act.insert(act.end(), step.begin(), step.end());
  for (std::size_t l = 0; l < arch.fc.size(); ++l) {
    const nn::FcSlots& s = layout.fc()[l];
    std::vector<double> out(s.out);
    for (std::size_t i = 0; i < s.out; ++i) {
      double v = 0.0;
      for (std::size_t j = 0; j < s.in; ++j) v += at(params, s.weight, s.out, i, j) * act[j];
      v += params[s.bias + i];
      out[i] = arch.fc[l].tanh ? std::tanh(v) : v;
    }
    act = std::move(out);
  }
  return act.at(0);
}

std::vector<double> predict(const nn::Architecture& arch, std::span<const double> params,
                            std::span<const WindowSample> windows) {
  std::vector<double> out;
  out.reserve(windows.size());
  for (const WindowSample& w : windows) out.push_back(forward(arch, params, w));
  return out;
}

}  // namespace doorinet::reference
