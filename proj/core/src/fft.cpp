#include "speclearn/fft.hpp"

#include <cmath>

namespace speclearn {

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

void fft_radix2(std::vector<std::complex<double>>& x, bool inverse) {
  const size_t n = x.size();
  // bit reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = x[i + k];
        const std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

void dft_direct(std::vector<std::complex<double>>& x, bool inverse) {
  const size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  const double sign = inverse ? 2.0 : -2.0;
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t m = 0; m < n; ++m) {
      const double ang = sign * M_PI * static_cast<double>(k * m) / static_cast<double>(n);
      acc += x[m] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  x = std::move(out);
}

}  // namespace

void fft_inplace(std::vector<std::complex<double>>& x, bool inverse) {
  if (x.size() <= 1) return;
  if (is_pow2(x.size())) {
    fft_radix2(x, inverse);
  } else {
    dft_direct(x, inverse);
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(x.size());
    for (auto& v : x) v *= inv_n;
  }
}

std::vector<std::complex<double>> fft(std::vector<std::complex<double>> x) {
  fft_inplace(x, false);
  return x;
}

std::vector<std::complex<double>> ifft(std::vector<std::complex<double>> x) {
  fft_inplace(x, true);
  return x;
}

}  // namespace speclearn
