#pragma once

// Filter banks: collections of convolution atoms plus one designated
// output-generating (low-pass) atom, with exact DFT-domain frame bounds.
//
// On a periodic grid the Bessel bound is the max over DFT bins of the summed
// squared transfer functions; Plancherel then gives
//   sum_atoms ||f * g||_2^2 <= B ||f||_2^2
// as an identity-backed inequality, not an estimate.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "scatstab/rng.hpp"
#include "scatstab/signal.hpp"

namespace scatstab {

struct Atom {
    std::string label;
    Signal filter;
};

struct FilterBank {
    Grid grid;
    std::vector<Atom> atoms;  // propagation atoms, in deterministic label order
    Atom output_atom;         // the low-pass atom generating layer outputs

    std::size_t total_atoms() const { return atoms.size() + 1; }

    void validate() const {
        for (const Atom& a : atoms)
            if (a.filter.grid != grid) throw std::invalid_argument("FilterBank: atom grid mismatch");
        if (output_atom.filter.grid != grid)
            throw std::invalid_argument("FilterBank: output atom grid mismatch");
        for (const Atom& a : atoms)
            if (a.label == output_atom.label)
                throw std::invalid_argument("FilterBank: output atom label collides with a propagation atom");
    }
};

// Max over DFT bins of the summed squared transfer functions, over all atoms
// including the output atom.
inline double bessel_bound(const FilterBank& bank) {
    if (bank.output_atom.filter.samples.empty()) throw std::invalid_argument("bessel_bound: empty bank");
    std::vector<double> acc(bank.grid.size(), 0.0);
    auto add = [&acc](const Signal& g) {
        const std::vector<cplx> T = transfer_function(g);
        for (std::size_t i = 0; i < T.size(); ++i) acc[i] += std::norm(T[i]);
    };
    for (const Atom& a : bank.atoms) add(a.filter);
    add(bank.output_atom.filter);
    return *std::max_element(acc.begin(), acc.end());
}

struct NormalizedBank {
    FilterBank bank;
    double scale;          // factor applied to every atom (1 if already admissible)
    double bessel_before;
    double bessel_after;
};

// Scale the bank so that bessel_bound * max(1, L^2) <= 1 (weak admissibility
// for a layer whose non-linearity has Lipschitz constant L). Idempotent.
inline NormalizedBank normalize_bank(const FilterBank& bank, double lipschitz) {
    if (!(lipschitz > 0.0)) throw std::invalid_argument("normalize_bank: Lipschitz constant must be positive");
    const double before = bessel_bound(bank);
    const double target = before * std::max(1.0, lipschitz * lipschitz);
    // tolerance keeps re-normalization of an already admissible bank a no-op
    const double c = target <= 1.0 + 1e-12 ? 1.0 : 1.0 / std::sqrt(target);
    NormalizedBank out{bank, c, before, before};
    if (c != 1.0) {
        for (Atom& a : out.bank.atoms)
            for (cplx& v : a.filter.samples) v *= c;
        for (cplx& v : out.bank.output_atom.filter.samples) v *= c;
        out.bessel_after = bessel_bound(out.bank);
    }
    return out;
}

namespace detail {

// Build an atom from its transfer function sampled on the DFT bins
// (continuous-FT units), returning centered spatial samples.
inline Signal atom_from_transfer(const Grid& g, const std::function<cplx(const Coord&)>& transfer) {
    std::vector<cplx> T(g.size());
    for (std::size_t k0 = 0; k0 < g.extent[0]; ++k0) {
        for (std::size_t k1 = 0; k1 < g.extent[1]; ++k1) {
            Coord w{bin_frequency(g, 0, k0), g.dim == 2 ? bin_frequency(g, 1, k1) : 0.0};
            T[g.index(k0, k1)] = transfer(w);
        }
    }
    fft_grid(T, g, /*inverse=*/true);
    const double w = 1.0 / g.cell_volume();
    for (cplx& v : T) v *= w;
    fftshift(T, g);  // origin sample to index extent/2
    return Signal(g, std::move(T));
}

inline double radial(const Coord& w, int dim) {
    return dim == 2 ? std::hypot(w[0], w[1]) : std::abs(w[0]);
}

}  // namespace detail

// Gabor (Weyl-Heisenberg) bank: Gaussian window modulated to the given center
// frequencies. The atom with the smallest |center| becomes the output atom.
inline FilterBank make_gabor_bank(const Grid& grid, const std::vector<Coord>& center_frequencies,
                                  double width) {
    if (center_frequencies.empty()) throw std::invalid_argument("make_gabor_bank: no center frequencies");
    if (!(width > 0.0)) throw std::invalid_argument("make_gabor_bank: width must be positive");
    std::size_t low = 0;
    for (std::size_t m = 1; m < center_frequencies.size(); ++m) {
        const Coord &a = center_frequencies[m], &b = center_frequencies[low];
        if (detail::radial(a, grid.dim) < detail::radial(b, grid.dim)) low = m;
    }
    FilterBank bank;
    bank.grid = grid;
    for (std::size_t m = 0; m < center_frequencies.size(); ++m) {
        const Coord wc = center_frequencies[m];
        Signal g = sample_function(grid, [&](const Coord& x) {
            double r2 = x[0] * x[0], phase = wc[0] * x[0];
            if (grid.dim == 2) {
                r2 += x[1] * x[1];
                phase += wc[1] * x[1];
            }
            const double env = std::exp(-r2 / (2.0 * width * width));
            return cplx(env * std::cos(phase), env * std::sin(phase));
        });
        Atom atom{"g" + std::to_string(m), std::move(g)};
        if (m == low) bank.output_atom = std::move(atom);
        else bank.atoms.push_back(std::move(atom));
    }
    bank.validate();
    return bank;
}

enum class Mother { morlet, dog };

inline Mother mother_from_string(const std::string& s) {
    if (s == "morlet") return Mother::morlet;
    if (s == "dog") return Mother::dog;
    throw std::invalid_argument("unknown mother wavelet: " + s);
}

// Dyadic wavelet bank built in the DFT domain: num_scales band-pass atoms
// with centers xi_max * 2^{-j} plus a Gaussian low-pass output atom.
// morlet: one-sided (analytic) Gaussian bumps in 1-d, isotropic annuli in 2-d.
// dog: difference-of-Gaussians bands (real, symmetric).
inline FilterBank make_wavelet_bank(const Grid& grid, std::size_t num_scales, Mother mother = Mother::morlet) {
    if (num_scales == 0) throw std::invalid_argument("make_wavelet_bank: need at least one scale");
    const double nyquist = M_PI / grid.spacing;
    const double xi_max = 0.4 * nyquist;
    const double xi_min = xi_max * std::pow(2.0, -static_cast<double>(num_scales - 1));
    FilterBank bank;
    bank.grid = grid;
    for (std::size_t j = 0; j < num_scales; ++j) {
        const double xi = xi_max * std::pow(2.0, -static_cast<double>(j));
        Signal g;
        if (mother == Mother::morlet) {
            const double bw = 0.35 * xi;  // constant-Q band widths
            g = detail::atom_from_transfer(grid, [&](const Coord& w) {
                double arg;
                if (grid.dim == 1) {
                    // analytic: support on positive frequencies only
                    arg = (w[0] - xi) / bw;
                    if (w[0] <= 0.0) return cplx(0.0, 0.0);
                } else {
                    arg = (detail::radial(w, 2) - xi) / bw;
                }
                return cplx(std::exp(-0.5 * arg * arg), 0.0);
            });
        } else {
            const double s_wide = 1.0 / xi;           // passes up to ~xi
            const double s_narrow = 2.0 / xi;         // passes up to ~xi/2
            g = detail::atom_from_transfer(grid, [&](const Coord& w) {
                const double r2 = detail::radial(w, grid.dim) * detail::radial(w, grid.dim);
                return cplx(std::exp(-0.5 * r2 * s_wide * s_wide) - std::exp(-0.5 * r2 * s_narrow * s_narrow),
                            0.0);
            });
        }
        bank.atoms.push_back(Atom{"j" + std::to_string(j), std::move(g)});
    }
    const double s_lp = 2.0 / xi_min;  // low-pass covering below the last band
    bank.output_atom =
        Atom{"lp", detail::atom_from_transfer(grid, [&](const Coord& w) {
                 const double r = detail::radial(w, grid.dim);
                 return cplx(std::exp(-0.5 * r * r * s_lp * s_lp), 0.0);
             })};
    bank.validate();
    return bank;
}

// Random bank: seeded random spectra shaped by a smoothness-controlled
// Gaussian envelope. The atom with the lowest spectral centroid is
// designated as the output atom.
inline FilterBank make_random_bank(const Grid& grid, std::size_t count, std::uint64_t seed,
                                   double smoothness) {
    if (count == 0) throw std::invalid_argument("make_random_bank: count must be positive");
    if (!(smoothness > 0.0)) throw std::invalid_argument("make_random_bank: smoothness must be positive");
    Rng rng(seed);
    std::vector<Atom> all;
    std::vector<double> centroid(count, 0.0);
    for (std::size_t m = 0; m < count; ++m) {
        // draw low-dimensional random spectral bumps, then envelope them
        const double bump_center = rng.uniform(0.0, 0.5 * M_PI / grid.spacing);
        const double bump_width = rng.uniform(0.2, 1.0) * (0.2 * M_PI / grid.spacing);
        const double phase_seed = rng.uniform(0.0, 2.0 * M_PI);
        Signal g = detail::atom_from_transfer(grid, [&](const Coord& w) {
            const double r = detail::radial(w, grid.dim);
            const double band = std::exp(-0.5 * (r - bump_center) * (r - bump_center) / (bump_width * bump_width));
            const double env = std::exp(-0.5 * (r * smoothness) * (r * smoothness));
            const double ph = phase_seed * (1.0 + 0.1 * r);
            return cplx(band * env * std::cos(ph), band * env * std::sin(ph));
        });
        // spectral centroid from the transfer function
        const std::vector<cplx> T = transfer_function(g);
        double num = 0.0, den = 0.0;
        for (std::size_t k0 = 0; k0 < grid.extent[0]; ++k0)
            for (std::size_t k1 = 0; k1 < grid.extent[1]; ++k1) {
                Coord w{bin_frequency(grid, 0, k0), grid.dim == 2 ? bin_frequency(grid, 1, k1) : 0.0};
                const double p = std::norm(T[grid.index(k0, k1)]);
                num += p * detail::radial(w, grid.dim);
                den += p;
            }
        centroid[m] = den > 0 ? num / den : 0.0;
        all.push_back(Atom{"r" + std::to_string(m), std::move(g)});
    }
    const std::size_t low = static_cast<std::size_t>(
        std::min_element(centroid.begin(), centroid.end()) - centroid.begin());
    FilterBank bank;
    bank.grid = grid;
    for (std::size_t m = 0; m < count; ++m) {
        if (m == low) bank.output_atom = std::move(all[m]);
        else bank.atoms.push_back(std::move(all[m]));
    }
    bank.validate();
    return bank;
}

// Identity bank: a single delta output atom and no propagation atoms; the
// resulting extractor is the identity map.
inline FilterBank make_delta_bank(const Grid& grid) {
    FilterBank bank;
    bank.grid = grid;
    bank.output_atom = Atom{"delta", delta_signal(grid)};
    bank.validate();
    return bank;
}

}  // namespace scatstab
