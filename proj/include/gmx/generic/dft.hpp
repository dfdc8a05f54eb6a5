#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace gmx {

using Complex = std::complex<double>;

/// 2-D discrete Fourier transform of an h x w row-major grid, computed
/// separably (rows, then columns). Power-of-two line lengths use an
/// iterative radix-2 FFT; other lengths fall back to the direct sum.
class Dft2d {
 public:
  Dft2d(std::size_t h, std::size_t w) : h_(h), w_(w), tw_h_(twiddles(h)), tw_w_(twiddles(w)) {}

  std::vector<Complex> forward(const std::vector<Complex>& grid) const { return transform(grid, false); }

  /// Inverse transform including the 1/(h*w) scale.
  std::vector<Complex> inverse(const std::vector<Complex>& grid) const {
    std::vector<Complex> out = transform(grid, true);
    const double scale = 1.0 / static_cast<double>(h_ * w_);
    for (Complex& v : out) v *= scale;
    return out;
  }

 private:
  static std::vector<Complex> twiddles(std::size_t n) {
    std::vector<Complex> t(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      t[k] = Complex(std::cos(a), std::sin(a));
    }
    return t;
  }

  static bool power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

  static void line(const Complex* in, std::size_t stride, std::size_t n, const std::vector<Complex>& tw,
                   bool inverse, Complex* out) {
    if (power_of_two(n)) {
      fft(in, stride, n, tw, inverse, out);
      return;
    }
    for (std::size_t k = 0; k < n; ++k) {
      Complex acc{0.0, 0.0};
      for (std::size_t j = 0; j < n; ++j) {
        const Complex t = tw[(j * k) % n];
        acc += in[j * stride] * (inverse ? std::conj(t) : t);
      }
      out[k] = acc;
    }
  }

  static void fft(const Complex* in, std::size_t stride, std::size_t n, const std::vector<Complex>& tw,
                  bool inverse, Complex* out) {
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      out[r] = in[i * stride];
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const std::size_t step = n / len;
      for (std::size_t start = 0; start < n; start += len) {
        for (std::size_t j = 0; j < len / 2; ++j) {
          const Complex t = inverse ? std::conj(tw[j * step]) : tw[j * step];
          const Complex u = out[start + j];
          const Complex v = out[start + j + len / 2] * t;
          out[start + j] = u + v;
          out[start + j + len / 2] = u - v;
        }
      }
    }
  }

  std::vector<Complex> transform(const std::vector<Complex>& grid, bool inverse) const {
    std::vector<Complex> tmp(h_ * w_), out(h_ * w_), col_in(h_), col_out(h_);
    for (std::size_t y = 0; y < h_; ++y) line(&grid[y * w_], 1, w_, tw_w_, inverse, &tmp[y * w_]);
    for (std::size_t x = 0; x < w_; ++x) {
      line(&tmp[x], w_, h_, tw_h_, inverse, col_out.data());
      for (std::size_t y = 0; y < h_; ++y) out[y * w_ + x] = col_out[y];
    }
    return out;
  }

  std::size_t h_, w_;
  std::vector<Complex> tw_h_, tw_w_;
};

}  // namespace gmx
