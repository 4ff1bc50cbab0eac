#pragma once

// Sampled complex-valued functions on a Grid, with L^p quadrature norms,
// FFT-based periodic convolution and norm-preserving sub-sampling.
//
// Quadrature convention: every L^2 / L^1 quantity carries the Riemann
// weight dx^d, so discrete values approximate their continuous
// counterparts and Parseval reads ||f||_2^2 = dx^d/N * sum_k |fhat_k|^2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "scatstab/fft.hpp"
#include "scatstab/grid.hpp"

namespace scatstab {

struct Signal {
    Grid grid;
    std::vector<cplx> samples;

    Signal() = default;
    explicit Signal(const Grid& g) : grid(g), samples(g.size(), cplx(0.0, 0.0)) {}
    Signal(const Grid& g, std::vector<cplx> s) : grid(g), samples(std::move(s)) {
        if (samples.size() != grid.size()) throw std::invalid_argument("Signal: sample count does not match grid");
    }

    cplx& at(std::size_t i0, std::size_t i1 = 0) { return samples[grid.index(i0, i1)]; }
    const cplx& at(std::size_t i0, std::size_t i1 = 0) const { return samples[grid.index(i0, i1)]; }
};

// Pointwise synthesis from a coordinate function.
inline Signal sample_function(const Grid& g, const std::function<cplx(const Coord&)>& f) {
    Signal out(g);
    for (std::size_t i0 = 0; i0 < g.extent[0]; ++i0)
        for (std::size_t i1 = 0; i1 < g.extent[1]; ++i1)
            out.samples[g.index(i0, i1)] = f(g.point(i0, i1));
    return out;
}

// Discrete delta of mass dx^{-d} at the origin sample; convolution identity.
inline Signal delta_signal(const Grid& g) {
    Signal out(g);
    out.at(g.extent[0] / 2, g.dim == 2 ? g.extent[1] / 2 : 0) = cplx(1.0 / g.cell_volume(), 0.0);
    return out;
}

inline double squared_l2_norm(const Signal& f) {
    double acc = 0.0;
    for (const cplx& v : f.samples) acc += std::norm(v);
    return acc * f.grid.cell_volume();
}

inline double l2_norm(const Signal& f) { return std::sqrt(squared_l2_norm(f)); }

inline double l1_norm(const Signal& f) {
    double acc = 0.0;
    for (const cplx& v : f.samples) acc += std::abs(v);
    return acc * f.grid.cell_volume();
}

inline double sup_norm(const Signal& f) {
    double m = 0.0;
    for (const cplx& v : f.samples) m = std::max(m, std::abs(v));
    return m;
}

inline Signal operator+(const Signal& a, const Signal& b) {
    if (a.grid != b.grid) throw std::invalid_argument("Signal: grid mismatch");
    Signal out(a.grid);
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] = a.samples[i] + b.samples[i];
    return out;
}

inline Signal operator-(const Signal& a, const Signal& b) {
    if (a.grid != b.grid) throw std::invalid_argument("Signal: grid mismatch");
    Signal out(a.grid);
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] = a.samples[i] - b.samples[i];
    return out;
}

inline Signal operator*(const Signal& a, cplx c) {
    Signal out = a;
    for (cplx& v : out.samples) v *= c;
    return out;
}

inline double l2_distance(const Signal& a, const Signal& b) { return l2_norm(a - b); }

// Unnormalized forward DFT of the raw samples.
inline std::vector<cplx> dft(const Signal& f) {
    std::vector<cplx> X = f.samples;
    fft_grid(X, f.grid);
    return X;
}

// Transfer function in continuous-FT units: the per-bin multiplier that
// convolution with g applies to a signal's DFT. The origin sample acts as
// lag zero, so the array is rotated before the transform; bin k corresponds
// to bin_frequency(grid, axis, k).
inline std::vector<cplx> transfer_function(const Signal& g) {
    std::vector<cplx> X = g.samples;
    fftshift(X, g.grid);
    fft_grid(X, g.grid);
    const double w = g.grid.cell_volume();
    for (cplx& v : X) v *= w;
    return X;
}

namespace detail {

// True iff g is exactly the discrete delta (mass dx^{-d} at the origin
// sample). Detecting it keeps convolution with the identity atom bit-exact.
inline bool is_delta(const Signal& g) {
    const std::size_t o = g.grid.index(g.grid.extent[0] / 2, g.grid.dim == 2 ? g.grid.extent[1] / 2 : 0);
    if (g.samples[o] != cplx(1.0 / g.grid.cell_volume(), 0.0)) return false;
    for (std::size_t i = 0; i < g.samples.size(); ++i)
        if (i != o && g.samples[i] != cplx(0.0, 0.0)) return false;
    return true;
}

}  // namespace detail

// Periodic (circular) convolution with dx^d quadrature weight, so the result
// approximates (f*g)(x) = int f(y) g(x-y) dy. Both inputs live on the same
// centered grid; g is re-indexed so its origin sample acts as lag zero.
inline Signal fft_convolve(const Signal& f, const Signal& g) {
    if (f.grid != g.grid) throw std::invalid_argument("fft_convolve: grid mismatch");
    if (detail::is_delta(g)) return f;
    if (detail::is_delta(f)) return g;
    std::vector<cplx> F = f.samples;
    fft_grid(F, f.grid);
    std::vector<cplx> G = g.samples;
    fftshift(G, g.grid);  // move origin sample to index 0
    fft_grid(G, g.grid);
    const double w = f.grid.cell_volume();
    for (std::size_t i = 0; i < F.size(); ++i) F[i] *= G[i];
    fft_grid(F, f.grid, /*inverse=*/true);
    for (cplx& v : F) v *= w;
    return Signal(f.grid, std::move(F));
}

// Keep every R-th sample and scale by R^{d/2}; the discrete counterpart of
// the unitary dilation R^{d/2} f(R x). The output grid keeps the input
// spacing (the physical domain shrinks by R), which is what makes the
// operation norm-preserving on R-block-constant and band-limited signals.
inline Signal subsample(const Signal& f, std::size_t R) {
    if (R == 0) throw std::invalid_argument("subsample: R must be positive");
    if (R == 1) return f;
    const Grid& g = f.grid;
    std::array<std::size_t, 2> ext = g.extent;
    for (int a = 0; a < g.dim; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        if (ext[ua] % R != 0) throw std::invalid_argument("subsample: R does not divide extent");
        ext[ua] /= R;
        if (ext[ua] < 2) throw std::invalid_argument("subsample: output extent below 2");
    }
    Grid out_grid(g.dim, ext, g.spacing);
    Signal out(out_grid);
    const double scale = std::pow(static_cast<double>(R), 0.5 * g.dim);
    for (std::size_t i0 = 0; i0 < out_grid.extent[0]; ++i0)
        for (std::size_t i1 = 0; i1 < out_grid.extent[1]; ++i1)
            out.samples[out_grid.index(i0, i1)] = scale * f.samples[g.index(i0 * R, i1 * R)];
    return out;
}

}  // namespace scatstab
