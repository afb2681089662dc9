#pragma once

#include <complex>
#include <vector>

namespace rfsep {

// Unnormalized forward DFT (FFTW convention: X[k] = sum_n x[n] e^{-i 2pi kn/N}).
std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x);

// Inverse DFT including the 1/N factor, so ifft(fft(x)) == x.
std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& x);

// Frequency in Hz of DFT bin k for an N-point transform at rate fs,
// mapped to [-fs/2, fs/2).
double bin_frequency_hz(size_t k, size_t n, double fs);

} // namespace rfsep
