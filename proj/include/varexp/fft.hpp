#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace varexp::fft {

using cplx = std::complex<double>;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place radix-2 transform. sign = -1 forward, +1 inverse (unscaled).
inline void transform_pow2(cplx* data, std::size_t n, int sign) {
    if (!is_power_of_two(n)) throw std::invalid_argument("fft: length must be a power of two");
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    const double pi = 3.14159265358979323846;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * pi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = data[i + k];
                cplx v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

inline void forward(std::vector<cplx>& a) { transform_pow2(a.data(), a.size(), -1); }

inline void inverse(std::vector<cplx>& a) {
    transform_pow2(a.data(), a.size(), +1);
    const double s = 1.0 / static_cast<double>(a.size());
    for (auto& v : a) v *= s;
}

/// Row-major n x n grid, transforms along both axes.
inline void forward_2d(std::vector<cplx>& a, std::size_t n) {
    if (a.size() != n * n) throw std::invalid_argument("fft: bad 2d size");
    for (std::size_t row = 0; row < n; ++row) transform_pow2(a.data() + row * n, n, -1);
    std::vector<cplx> col(n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t r = 0; r < n; ++r) col[r] = a[r * n + c];
        transform_pow2(col.data(), n, -1);
        for (std::size_t r = 0; r < n; ++r) a[r * n + c] = col[r];
    }
}

inline void inverse_2d(std::vector<cplx>& a, std::size_t n) {
    if (a.size() != n * n) throw std::invalid_argument("fft: bad 2d size");
    for (std::size_t row = 0; row < n; ++row) transform_pow2(a.data() + row * n, n, +1);
    std::vector<cplx> col(n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t r = 0; r < n; ++r) col[r] = a[r * n + c];
        transform_pow2(col.data(), n, +1);
        for (std::size_t r = 0; r < n; ++r) a[r * n + c] = col[r];
    }
    const double s = 1.0 / static_cast<double>(n * n);
    for (auto& v : a) v *= s;
}

}  // namespace varexp::fft
