#pragma once

// Test-only reference implementations, independent of the library's
// computational paths: naive DFT, direct-sum convolution, polygonal arc
// length, and simple random signal generators.

#include <cmath>
#include <complex>
#include <vector>

#include "scatstab/grid.hpp"
#include "scatstab/rng.hpp"
#include "scatstab/signal.hpp"

namespace oracles {

using scatstab::cplx;
using scatstab::Grid;
using scatstab::Rng;
using scatstab::Signal;

// O(N^2) DFT of a 1-d buffer.
inline std::vector<cplx> naive_dft(const std::vector<cplx>& x, bool inverse = false) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n, cplx(0.0, 0.0));
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            const double a = sign * 2.0 * M_PI * double(k) * double(j) / double(n);
            out[k] += x[j] * cplx(std::cos(a), std::sin(a));
        }
    }
    if (inverse)
        for (cplx& v : out) v /= double(n);
    return out;
}

// Direct-sum circular convolution with centered-filter indexing and dx^d
// weight; the quadratic-time mirror of fft_convolve.
inline Signal naive_convolve(const Signal& f, const Signal& g) {
    const Grid& gr = f.grid;
    Signal out(gr);
    const double w = gr.cell_volume();
    const std::ptrdiff_t n0 = static_cast<std::ptrdiff_t>(gr.extent[0]);
    const std::ptrdiff_t n1 = static_cast<std::ptrdiff_t>(gr.extent[1]);
    auto wrap = [](std::ptrdiff_t i, std::ptrdiff_t n) {
        std::ptrdiff_t m = i % n;
        return static_cast<std::size_t>(m < 0 ? m + n : m);
    };
    for (std::ptrdiff_t i0 = 0; i0 < n0; ++i0)
        for (std::ptrdiff_t i1 = 0; i1 < n1; ++i1) {
            cplx acc(0.0, 0.0);
            for (std::ptrdiff_t j0 = 0; j0 < n0; ++j0)
                for (std::ptrdiff_t j1 = 0; j1 < n1; ++j1) {
                    // g evaluated at the coordinate difference: centered index
                    const std::size_t k0 = wrap(i0 - j0 + n0 / 2, n0);
                    const std::size_t k1 = gr.dim == 2 ? wrap(i1 - j1 + n1 / 2, n1) : 0;
                    acc += f.samples[gr.index(static_cast<std::size_t>(j0), static_cast<std::size_t>(j1))] *
                           g.samples[gr.index(k0, k1)];
                }
            out.samples[gr.index(static_cast<std::size_t>(i0), static_cast<std::size_t>(i1))] = acc * w;
        }
    return out;
}

// Arc length of a closed parametric curve by dense polygonal approximation.
template <typename PointFn>
inline double polygonal_arc_length(PointFn&& point, std::size_t segments) {
    double len = 0.0;
    double px = 0.0, py = 0.0;
    for (std::size_t k = 0; k <= segments; ++k) {
        const double t = 2.0 * M_PI * double(k) / double(segments);
        auto [x, y] = point(t);
        if (k > 0) len += std::hypot(x - px, y - py);
        px = x;
        py = y;
    }
    return len;
}

inline Signal random_signal(const Grid& g, std::uint64_t seed) {
    Rng rng(seed);
    Signal f(g);
    for (cplx& v : f.samples) v = cplx(rng.normal(), rng.normal());
    return f;
}

// Random signal whose DFT support stays inside |k| < extent/(2R) per axis,
// i.e. band-limited below the Nyquist rate of an R-fold subsampled grid.
inline Signal random_bandlimited_signal(const Grid& g, std::uint64_t seed, std::size_t R) {
    Rng rng(seed);
    std::vector<cplx> spec(g.size(), cplx(0.0, 0.0));
    auto keep = [&](std::size_t k, std::size_t n) {
        const std::size_t lim = n / (2 * R);
        return k < lim || n - k < lim;
    };
    for (std::size_t k0 = 0; k0 < g.extent[0]; ++k0)
        for (std::size_t k1 = 0; k1 < g.extent[1]; ++k1) {
            if (!keep(k0, g.extent[0])) continue;
            if (g.dim == 2 && !keep(k1, g.extent[1])) continue;
            spec[g.index(k0, k1)] = cplx(rng.normal(), rng.normal());
        }
    scatstab::fft_grid(spec, g, /*inverse=*/true);
    return Signal(g, std::move(spec));
}

}  // namespace oracles
