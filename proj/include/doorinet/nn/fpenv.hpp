// SPDX-License-Identifier: Apache-2.0
#pragma once

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

namespace doorinet::nn {

/// Sets flush-to-zero and denormals-are-zero on the current thread for the
/// guard's lifetime. Subnormal values carry no useful signal in training
/// but slow x86 floating-point arithmetic by two orders of magnitude;
/// decaying Adam moments of near-idle weights reach them quickly in f32.
/// The control register is per thread, so every OpenMP region that runs
/// network arithmetic opens its own guard.
class FlushDenormals {
 public:
#if defined(__SSE__)
  FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | kFtz | kDaz); }
  ~FlushDenormals() { _mm_setcsr(saved_); }
#else
  FlushDenormals() = default;
#endif
  FlushDenormals(const FlushDenormals&) = delete;
  FlushDenormals& operator=(const FlushDenormals&) = delete;

 private:
#if defined(__SSE__)
  static constexpr unsigned kFtz = 0x8000;
  static constexpr unsigned kDaz = 0x0040;
  unsigned saved_;
#endif
};

}  // namespace doorinet::nn
