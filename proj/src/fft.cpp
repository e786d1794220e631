#include "stfrac/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace stfrac {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;
}

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_pow2(std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    if (!is_pow2(n)) throw std::invalid_argument("fft_pow2: size must be a power of two");
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * kTwoPi / static_cast<double>(len);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cplx u = a[i + j];
                const cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (sign > 0) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= inv;
    }
}

void fft(std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    if (is_pow2(n)) {
        fft_pow2(a, sign);
        return;
    }
    // Bluestein: DFT of arbitrary length as a convolution of length >= 2n-1.
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;
    std::vector<cplx> u(m, cplx(0, 0)), v(m, cplx(0, 0));
    std::vector<cplx> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n to avoid losing precision for large k.
        const std::size_t k2 = (k * k) % (2 * n);
        const double ang = sign * kTwoPi * 0.5 * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = cplx(std::cos(ang), std::sin(ang));
        u[k] = a[k] * chirp[k];
        v[k] = std::conj(chirp[k]);
        if (k != 0) v[m - k] = std::conj(chirp[k]);
    }
    fft_pow2(u, -1);
    fft_pow2(v, -1);
    for (std::size_t k = 0; k < m; ++k) u[k] *= v[k];
    fft_pow2(u, +1);
    for (std::size_t k = 0; k < n; ++k) a[k] = u[k] * chirp[k];
    if (sign > 0) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= inv;
    }
}

std::vector<cplx> circular_convolution(std::vector<cplx> a, std::vector<cplx> b) {
    const std::size_t n = a.size();
    if (b.size() != n) throw std::invalid_argument("circular_convolution: size mismatch");
    fft(a, -1);
    fft(b, -1);
    for (std::size_t i = 0; i < n; ++i) a[i] *= b[i];
    fft(a, +1);
    return a;
}

void fft_nd(std::vector<cplx>& a, const std::vector<int>& shape, int sign) {
    std::size_t total = 1;
    for (int s : shape) total *= static_cast<std::size_t>(s);
    if (total != a.size()) throw std::invalid_argument("fft_nd: shape/size mismatch");
    std::size_t stride = 1;
    for (int axis = static_cast<int>(shape.size()) - 1; axis >= 0; --axis) {
        const std::size_t n = static_cast<std::size_t>(shape[axis]);
        std::vector<cplx> line(n);
        const std::size_t block = stride * n;
        for (std::size_t base = 0; base < total; base += block) {
            for (std::size_t off = 0; off < stride; ++off) {
                for (std::size_t i = 0; i < n; ++i) line[i] = a[base + off + i * stride];
                fft(line, sign);
                for (std::size_t i = 0; i < n; ++i) a[base + off + i * stride] = line[i];
            }
        }
        stride *= n;
    }
}

} // namespace stfrac
