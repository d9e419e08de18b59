// Copyright 2026 The vr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VR_DETAIL_FFT_HPP_
#define VR_DETAIL_FFT_HPP_

#include <complex>
#include <cstddef>
#include <vector>

namespace vr::detail {

// Iterative radix-2 Cooley-Tukey transform, in place. Size must be a power
// of two.
inline void fft(std::vector<std::complex<double>>& a, bool invert) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = 2.0 * M_PI / static_cast<double>(len) *
                         (invert ? -1.0 : 1.0);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (invert) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Pointwise integer power by repeated squaring, keeping the homogeneous
// K-fold convolution at a single forward/backward transform.
inline void pointwise_power(std::vector<std::complex<double>>& a,
                            std::uint64_t k) {
  for (auto& x : a) {
    std::complex<double> result(1.0, 0.0);
    std::complex<double> base = x;
    std::uint64_t e = k;
    while (e > 0) {
      if (e & 1) result *= base;
      base *= base;
      e >>= 1;
    }
    x = result;
  }
}

}  // namespace vr::detail

#endif  // VR_DETAIL_FFT_HPP_
