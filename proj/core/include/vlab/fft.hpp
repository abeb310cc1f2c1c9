#pragma once

#include <complex>
#include <span>

namespace vlab::fft {

using Complex = std::complex<double>;

// Real-to-complex 2D transform of an ny x nx row-major array into ny x (nx/2+1).
// Unnormalized, matching FFTW's convention.
void forward(int ny, int nx, std::span<const double> in, std::span<Complex> out);

// Inverse of forward, normalized so that inverse(forward(f)) == f.
void inverse(int ny, int nx, std::span<const Complex> in, std::span<double> out);

// Signed integer frequency of index k on an n-point axis.
constexpr int frequency(int k, int n) { return k <= n / 2 ? k : k - n; }

// Smallest m >= n whose prime factors are all in {2, 3, 5, 7}.
int good_size(int n);

}  // namespace vlab::fft
