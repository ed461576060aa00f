#pragma once

#include <complex>
#include <vector>

namespace nns {

using Cplx = std::complex<float>;

// In-place iterative radix-2 FFT. n must be a power of two.
void fft1d(Cplx* data, int n, bool inverse);

// Row-major 2D FFT on h x w (both powers of two). Inverse includes 1/(h*w).
void fft2d(std::vector<Cplx>& data, int h, int w, bool inverse);

inline int next_pow2(int v) {
    int p = 1;
    while (p < v) p <<= 1;
    return p;
}

}  // namespace nns
