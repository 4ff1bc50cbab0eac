#pragma once

// Iterative radix-2 complex FFT for power-of-two lengths, 1-d and 2-d.
// Unnormalized forward transform X_k = sum_n x_n e^{-2pi i nk/N};
// inverse includes the 1/N factor. Twiddle tables are cached per length.

#include <complex>
#include <cstddef>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "scatstab/grid.hpp"

namespace scatstab {

using cplx = std::complex<double>;

namespace detail {

inline const std::vector<cplx>& twiddle_table(std::size_t n) {
    static std::unordered_map<std::size_t, std::vector<cplx>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<cplx> w(n / 2);
    const double step = -2.0 * M_PI / static_cast<double>(n);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double a = step * static_cast<double>(k);
        w[k] = cplx(std::cos(a), std::sin(a));
    }
    return cache.emplace(n, std::move(w)).first->second;
}

inline const std::vector<std::size_t>& bitrev_table(std::size_t n) {
    static std::unordered_map<std::size_t, std::vector<std::size_t>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<std::size_t> rev(n, 0);
    std::size_t bits = 0;
    while ((std::size_t(1) << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < bits; ++b)
            if (i & (std::size_t(1) << b)) r |= std::size_t(1) << (bits - 1 - b);
        rev[i] = r;
    }
    return cache.emplace(n, std::move(rev)).first->second;
}

// In-place forward FFT on a contiguous buffer of power-of-two length.
inline void fft_inplace(cplx* x, std::size_t n) {
    if (n == 1) return;
    if (!is_power_of_two(n)) throw std::invalid_argument("fft: length must be a power of two");
    const auto& rev = bitrev_table(n);
    for (std::size_t i = 0; i < n; ++i)
        if (rev[i] > i) std::swap(x[i], x[rev[i]]);
    const auto& w = twiddle_table(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len >> 1;
        const std::size_t stride = n / len;
        for (std::size_t base = 0; base < n; base += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const cplx t = x[base + k + half] * w[k * stride];
                x[base + k + half] = x[base + k] - t;
                x[base + k] += t;
            }
        }
    }
}

inline void ifft_inplace(cplx* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] = std::conj(x[i]);
    fft_inplace(x, n);
    const double s = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::conj(x[i]) * s;
}

}  // namespace detail

// Forward DFT over the grid axes (row-major layout: index = i0*extent1 + i1).
inline void fft_grid(std::vector<cplx>& data, const Grid& g, bool inverse = false) {
    if (data.size() != g.size()) throw std::invalid_argument("fft_grid: size mismatch");
    const std::size_t n0 = g.extent[0], n1 = g.extent[1];
    auto run = inverse ? detail::ifft_inplace : detail::fft_inplace;
    if (g.dim == 1) {
        run(data.data(), n0);
        return;
    }
    for (std::size_t r = 0; r < n0; ++r) run(data.data() + r * n1, n1);
    std::vector<cplx> col(n0);
    for (std::size_t c = 0; c < n1; ++c) {
        for (std::size_t r = 0; r < n0; ++r) col[r] = data[r * n1 + c];
        run(col.data(), n0);
        for (std::size_t r = 0; r < n0; ++r) data[r * n1 + c] = col[r];
    }
}

// Angular frequency of DFT bin k along an axis (wrapped to [-pi/dx, pi/dx)).
inline double bin_frequency(const Grid& g, int axis, std::size_t k) {
    const std::size_t n = g.extent[static_cast<std::size_t>(axis)];
    const auto ks = static_cast<std::ptrdiff_t>(k);
    const auto half = static_cast<std::ptrdiff_t>(n / 2);
    const std::ptrdiff_t signed_k = ks >= half ? ks - static_cast<std::ptrdiff_t>(n) : ks;
    return 2.0 * M_PI * static_cast<double>(signed_k) / (static_cast<double>(n) * g.spacing);
}

// Rotate every axis by extent/2 so the origin sample moves to index 0
// (its own inverse on even lengths).
inline void fftshift(std::vector<cplx>& data, const Grid& g) {
    const std::size_t n0 = g.extent[0], n1 = g.extent[1];
    std::vector<cplx> out(data.size());
    for (std::size_t i = 0; i < n0; ++i) {
        const std::size_t si = (i + n0 / 2) % n0;
        for (std::size_t j = 0; j < n1; ++j) {
            const std::size_t sj = g.dim == 2 ? (j + n1 / 2) % n1 : j;
            out[i * n1 + j] = data[si * n1 + sj];
        }
    }
    data.swap(out);
}

}  // namespace scatstab
