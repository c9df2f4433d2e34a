#pragma once

#include <complex>
#include <vector>

namespace speclearn {

// In-place complex FFT. Radix-2 iterative for power-of-two sizes, direct
// DFT fallback otherwise (only small non-power-of-two sizes appear in
// practice). No normalization on the forward transform; the inverse divides
// by N.
void fft_inplace(std::vector<std::complex<double>>& x, bool inverse = false);

std::vector<std::complex<double>> fft(std::vector<std::complex<double>> x);
std::vector<std::complex<double>> ifft(std::vector<std::complex<double>> x);

bool is_pow2(size_t n);

}  // namespace speclearn
