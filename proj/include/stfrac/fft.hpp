#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace stfrac {

using cplx = std::complex<double>;

/// In-place complex FFT. n must be a power of two. sign=-1 forward, +1 inverse.
/// The inverse applies the 1/n normalization.
void fft_pow2(std::vector<cplx>& a, int sign);

/// Forward/inverse DFT of arbitrary length via Bluestein when n is not a
/// power of two.
void fft(std::vector<cplx>& a, int sign);

/// Circular convolution c[j] = sum_l a[j-l mod n] b[l].
std::vector<cplx> circular_convolution(std::vector<cplx> a, std::vector<cplx> b);

/// Multidimensional in-place FFT over a row-major array with the given shape.
void fft_nd(std::vector<cplx>& a, const std::vector<int>& shape, int sign);

bool is_pow2(std::size_t n);

} // namespace stfrac
