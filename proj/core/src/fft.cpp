#include "nns/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace nns {

void fft1d(Cplx* a, int n, bool inverse) {
    if (n & (n - 1)) throw std::invalid_argument("fft1d: size must be a power of two");
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * 3.14159265358979323846 / len * (inverse ? 1.0 : -1.0);
        Cplx wl(float(std::cos(ang)), float(std::sin(ang)));
        for (int i = 0; i < n; i += len) {
            Cplx w(1.f, 0.f);
            for (int k = 0; k < len / 2; ++k) {
                Cplx x = a[i + k], y = a[i + k + len / 2] * w;
                a[i + k] = x + y;
                a[i + k + len / 2] = x - y;
                w *= wl;
            }
        }
    }
}

void fft2d(std::vector<Cplx>& d, int h, int w, bool inverse) {
    if (int(d.size()) != h * w) throw std::invalid_argument("fft2d: size mismatch");
    for (int y = 0; y < h; ++y) fft1d(d.data() + size_t(y) * w, w, inverse);
    std::vector<Cplx> col(static_cast<size_t>(h));
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) col[size_t(y)] = d[size_t(y) * w + x];
        fft1d(col.data(), h, inverse);
        for (int y = 0; y < h; ++y) d[size_t(y) * w + x] = col[size_t(y)];
    }
    if (inverse) {
        float s = 1.f / float(h * w);
        for (Cplx& c : d) c *= s;
    }
}

}  // namespace nns
