// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace doorinet::nn {

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
using Index = Eigen::Index;

/// Dense real matrix used for weights (column-major storage).
using Tensor2 = Matrix<double>;

/// Flat buffer whose base address has Eigen's maximum alignment. Vectorised
/// kernels choose their scalar/packet split by address, so buffers with a
/// varying base would round differently from one allocation to the next.
template <class T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

/// Seeded 64-bit Mersenne Twister with distribution code written out here, so
/// streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent stream keyed by (seed, a, b, c) via splitmix64 mixing.
  static Rng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                    std::uint64_t c = 0);

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n) by rejection; n > 0.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller (no cached second value).
  double normal();

  std::string state() const;
  void set_state(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Xavier/Glorot uniform: entries in +-sqrt(6 / (fan_in + fan_out)) with
/// fan_in = cols and fan_out = rows.
Tensor2 xavier_init(Index rows, Index cols, Rng& rng);

double xavier_bound(Index fan_in, Index fan_out);

}  // namespace doorinet::nn
