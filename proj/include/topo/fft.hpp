// fft.hpp
//
// 2D discrete Fourier transform on flat row-major complex buffers.
// Power-of-two lengths use the iterative radix-2 algorithm; other lengths
// fall back to the direct O(n^2) transform, which is fine at the image
// sizes handled here. The inverse carries the 1/N scaling so that
// inverse(forward(x)) == x up to rounding.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace topo {

using Complex = std::complex<double>;

namespace fft_detail {

constexpr double kPi = 3.14159265358979323846;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline void fft_radix2(Complex* x, std::size_t n, bool inverse) {
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const Complex wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const Complex u = x[i + k];
        const Complex v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

inline void dft_direct(Complex* x, std::size_t n, bool inverse) {
  std::vector<Complex> out(n, Complex(0.0, 0.0));
  const double sign = inverse ? 2.0 : -2.0;
  for (std::size_t f = 0; f < n; ++f)
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = sign * kPi * static_cast<double>(f * t) / static_cast<double>(n);
      out[f] += x[t] * Complex(std::cos(ang), std::sin(ang));
    }
  for (std::size_t i = 0; i < n; ++i) x[i] = out[i];
}

inline void transform_1d(Complex* x, std::size_t n, bool inverse) {
  if (n == 1) return;
  if (is_pow2(n))
    fft_radix2(x, n, inverse);
  else
    dft_direct(x, n, inverse);
  if (inverse)
    for (std::size_t i = 0; i < n; ++i) x[i] /= static_cast<double>(n);
}

}  // namespace fft_detail

/// In-place 2D DFT of an h x w row-major buffer (rows first, then columns).
inline void fft_2d(std::vector<Complex>& data, int h, int w, bool inverse) {
  if (h <= 0 || w <= 0 || data.size() != static_cast<std::size_t>(h) * w)
    throw std::invalid_argument("fft_2d: buffer does not match the given shape");
  for (int i = 0; i < h; ++i)
    fft_detail::transform_1d(data.data() + static_cast<std::size_t>(i) * w, w, inverse);
  std::vector<Complex> col(h);
  for (int j = 0; j < w; ++j) {
    for (int i = 0; i < h; ++i) col[i] = data[static_cast<std::size_t>(i) * w + j];
    fft_detail::transform_1d(col.data(), h, inverse);
    for (int i = 0; i < h; ++i) data[static_cast<std::size_t>(i) * w + j] = col[i];
  }
}

}  // namespace topo
