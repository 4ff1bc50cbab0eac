#pragma once

// Displacement fields tau and the warping operator f(. - tau(.)), with
// exact or densely-measured field norms, tube-volume measurement for
// indicator deformation errors, and the smooth-class stability constant.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "scatstab/cartoon.hpp"
#include "scatstab/grid.hpp"
#include "scatstab/quadrature.hpp"
#include "scatstab/rng.hpp"
#include "scatstab/signal.hpp"

namespace scatstab {

using Jacobian = std::array<std::array<double, 2>, 2>;  // row i: d tau_i / d x_j

enum class JacobianNorm { max_entry, frobenius };

// ---------------------------------------------------------------------------
// Field kinds
// ---------------------------------------------------------------------------

struct ConstantField {
    Coord shift{0.0, 0.0};
};

// tau(x) = amplitude * exp(-|x|^2) * direction  (direction is normalized).
struct GaussianBumpField {
    double amplitude = 0.0;
    Coord direction{1.0, 0.0};
};

// Band-limited random field: each component is a seeded trigonometric
// polynomial with wavenumbers up to max_wavenumber on the given period,
// rescaled so the measured sup equals `amplitude`.
struct SmoothRandomField {
    double amplitude = 0.0;
    std::uint64_t seed = 0;
    int max_wavenumber = 1;
    double period = 8.0;

    struct Mode {
        Coord wavevec;       // angular frequency vector
        double coeff_cos[2];  // per output component
        double coeff_sin[2];
    };
    std::vector<Mode> modes;
    double scale = 1.0;  // amplitude / measured raw sup
};

using FieldVariant = std::variant<ConstantField, GaussianBumpField, SmoothRandomField>;

struct DeformationField {
    int dim = 1;
    FieldVariant field;

    Coord eval(const Coord& x) const;
    Jacobian jacobian(const Coord& x) const;
};

namespace detail {

inline double vec_norm(const Coord& v, int dim) { return dim == 2 ? std::hypot(v[0], v[1]) : std::abs(v[0]); }

inline std::size_t dense_axis_samples(int dim) { return dim == 2 ? 768 : 16384; }

}  // namespace detail

inline Coord DeformationField::eval(const Coord& x) const {
    return std::visit(
        [&](const auto& f) -> Coord {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConstantField>) {
                return f.shift;
            } else if constexpr (std::is_same_v<T, GaussianBumpField>) {
                const double r2 = x[0] * x[0] + (dim == 2 ? x[1] * x[1] : 0.0);
                const double v = f.amplitude * std::exp(-r2);
                return Coord{v * f.direction[0], dim == 2 ? v * f.direction[1] : 0.0};
            } else {
                Coord out{0.0, 0.0};
                for (const auto& m : f.modes) {
                    const double phase = m.wavevec[0] * x[0] + (dim == 2 ? m.wavevec[1] * x[1] : 0.0);
                    const double c = std::cos(phase), s = std::sin(phase);
                    out[0] += m.coeff_cos[0] * c + m.coeff_sin[0] * s;
                    if (dim == 2) out[1] += m.coeff_cos[1] * c + m.coeff_sin[1] * s;
                }
                out[0] *= f.scale;
                out[1] *= f.scale;
                return out;
            }
        },
        field);
}

inline Jacobian DeformationField::jacobian(const Coord& x) const {
    return std::visit(
        [&](const auto& f) -> Jacobian {
            Jacobian J{{{0.0, 0.0}, {0.0, 0.0}}};
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConstantField>) {
                return J;
            } else if constexpr (std::is_same_v<T, GaussianBumpField>) {
                const double r2 = x[0] * x[0] + (dim == 2 ? x[1] * x[1] : 0.0);
                const double v = f.amplitude * std::exp(-r2);
                for (int i = 0; i < dim; ++i)
                    for (int j = 0; j < dim; ++j)
                        J[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                            -2.0 * v * f.direction[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)];
                return J;
            } else {
                for (const auto& m : f.modes) {
                    const double phase = m.wavevec[0] * x[0] + (dim == 2 ? m.wavevec[1] * x[1] : 0.0);
                    const double c = std::cos(phase), s = std::sin(phase);
                    for (int i = 0; i < dim; ++i) {
                        const double d_phase = -m.coeff_cos[static_cast<std::size_t>(i)] * s +
                                               m.coeff_sin[static_cast<std::size_t>(i)] * c;
                        for (int j = 0; j < dim; ++j)
                            J[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
                                d_phase * m.wavevec[static_cast<std::size_t>(j)];
                    }
                }
                for (auto& row : J)
                    for (double& v : row) v *= f.scale;
                return J;
            }
        },
        field);
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

inline DeformationField make_translation(int dim, const Coord& shift) {
    return DeformationField{dim, ConstantField{shift}};
}

inline DeformationField make_gaussian_bump(int dim, double amplitude, Coord direction = {1.0, 0.0}) {
    const double n = detail::vec_norm(direction, dim);
    if (!(n > 0.0)) throw std::invalid_argument("make_gaussian_bump: zero direction");
    direction[0] /= n;
    direction[1] = dim == 2 ? direction[1] / n : 0.0;
    return DeformationField{dim, GaussianBumpField{amplitude, direction}};
}

inline DeformationField make_smooth_random_field(int dim, double amplitude, std::uint64_t seed,
                                                 int max_wavenumber = 1, double period = 8.0) {
    if (max_wavenumber < 1) throw std::invalid_argument("make_smooth_random_field: max_wavenumber >= 1");
    if (!(period > 0.0)) throw std::invalid_argument("make_smooth_random_field: period must be positive");
    SmoothRandomField f;
    f.amplitude = amplitude;
    f.seed = seed;
    f.max_wavenumber = max_wavenumber;
    f.period = period;
    Rng rng(seed);
    const double w0 = 2.0 * M_PI / period;
    const int kmax = max_wavenumber;
    auto add_mode = [&](int k0, int k1) {
        SmoothRandomField::Mode m;
        m.wavevec = {w0 * k0, w0 * k1};
        const double decay = 1.0 / (1.0 + double(k0 * k0 + k1 * k1));
        for (int i = 0; i < 2; ++i) {
            m.coeff_cos[i] = rng.normal() * decay;
            m.coeff_sin[i] = rng.normal() * decay;
        }
        f.modes.push_back(m);
    };
    if (dim == 1) {
        for (int k = 1; k <= kmax; ++k) add_mode(k, 0);
    } else {
        for (int k0 = -kmax; k0 <= kmax; ++k0)
            for (int k1 = 0; k1 <= kmax; ++k1) {
                if (k1 == 0 && k0 <= 0) continue;  // half-plane: avoids duplicate +-k pairs
                add_mode(k0, k1);
            }
    }
    // rescale so the measured sup hits the target amplitude
    DeformationField raw{dim, f};
    double sup = 0.0;
    const std::size_t n = detail::dense_axis_samples(dim);
    const double step = period / static_cast<double>(n);
    if (dim == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            const Coord x{-0.5 * period + static_cast<double>(i) * step, 0.0};
            sup = std::max(sup, std::abs(raw.eval(x)[0]));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const Coord x{-0.5 * period + static_cast<double>(i) * step,
                              -0.5 * period + static_cast<double>(j) * step};
                sup = std::max(sup, detail::vec_norm(raw.eval(x), 2));
            }
    }
    f.scale = sup > 0.0 ? amplitude / sup : 0.0;
    return DeformationField{dim, f};
}

// ---------------------------------------------------------------------------
// Field norms
// ---------------------------------------------------------------------------

// sup_x |tau(x)|: exact for constant translations and Gaussian bumps,
// densely measured (on the field's period) for random fields.
inline double sup_norm(const DeformationField& tau) {
    if (const auto* c = std::get_if<ConstantField>(&tau.field))
        return detail::vec_norm(c->shift, tau.dim);
    if (const auto* b = std::get_if<GaussianBumpField>(&tau.field)) return std::abs(b->amplitude);
    const auto& f = std::get<SmoothRandomField>(tau.field);
    return std::abs(f.amplitude);  // held exactly by the construction-time rescale
}

// sup_x of the chosen matrix norm of D tau(x); closed form where available,
// dense evaluation otherwise.
inline double jacobian_sup(const DeformationField& tau, JacobianNorm norm = JacobianNorm::max_entry) {
    if (std::holds_alternative<ConstantField>(tau.field)) return 0.0;
    if (const auto* b = std::get_if<GaussianBumpField>(&tau.field)) {
        // |d tau_i / d x_j| = 2|a||dir_i||x_j| e^{-|x|^2}, maximal at |x_j| = 1/sqrt(2)
        const double peak = std::abs(b->amplitude) * std::sqrt(2.0) * std::exp(-0.5);
        double dmax = std::abs(b->direction[0]);
        double dfro2 = b->direction[0] * b->direction[0];
        if (tau.dim == 2) {
            dmax = std::max(dmax, std::abs(b->direction[1]));
            dfro2 += b->direction[1] * b->direction[1];
        }
        return norm == JacobianNorm::max_entry ? peak * dmax : peak * std::sqrt(dfro2);
    }
    const auto& f = std::get<SmoothRandomField>(tau.field);
    double sup = 0.0;
    const std::size_t n = detail::dense_axis_samples(tau.dim);
    const double step = f.period / static_cast<double>(n);
    auto entry_norm = [&](const Jacobian& J) {
        double v = 0.0;
        for (int i = 0; i < tau.dim; ++i)
            for (int j = 0; j < tau.dim; ++j) {
                const double e = J[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                if (norm == JacobianNorm::max_entry) v = std::max(v, std::abs(e));
                else v += e * e;
            }
        return norm == JacobianNorm::max_entry ? v : std::sqrt(v);
    };
    if (tau.dim == 1) {
        for (std::size_t i = 0; i < n; ++i)
            sup = std::max(sup, entry_norm(tau.jacobian({-0.5 * f.period + double(i) * step, 0.0})));
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                sup = std::max(sup, entry_norm(tau.jacobian({-0.5 * f.period + double(i) * step,
                                                             -0.5 * f.period + double(j) * step})));
    }
    return sup;
}

// ---------------------------------------------------------------------------
// Warping
// ---------------------------------------------------------------------------

enum class Interp { linear, cubic };

namespace detail {

inline std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
    std::ptrdiff_t m = i % static_cast<std::ptrdiff_t>(n);
    if (m < 0) m += static_cast<std::ptrdiff_t>(n);
    return static_cast<std::size_t>(m);
}

// Catmull-Rom weights for fractional offset t in [0,1).
inline std::array<double, 4> cubic_weights(double t) {
    const double t2 = t * t, t3 = t2 * t;
    return {-0.5 * t3 + t2 - 0.5 * t, 1.5 * t3 - 2.5 * t2 + 1.0, -1.5 * t3 + 2.0 * t2 + 0.5 * t,
            0.5 * t3 - 0.5 * t2};
}

inline cplx interp_axis1(const Signal& f, double u0, double u1, Interp kind) {
    const Grid& g = f.grid;
    const std::size_t n0 = g.extent[0], n1 = g.extent[1];
    auto sample_row = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
        return f.samples[wrap(r, n0) * n1 + wrap(c, n1)];
    };
    const double fl0 = std::floor(u0);
    const auto i0 = static_cast<std::ptrdiff_t>(fl0);
    const double t0 = u0 - fl0;
    if (g.dim == 1) {
        if (kind == Interp::linear)
            return (1.0 - t0) * sample_row(i0, 0) + t0 * sample_row(i0 + 1, 0);
        const auto w = cubic_weights(t0);
        cplx acc(0.0, 0.0);
        for (int k = 0; k < 4; ++k) acc += w[static_cast<std::size_t>(k)] * sample_row(i0 - 1 + k, 0);
        return acc;
    }
    const double fl1 = std::floor(u1);
    const auto i1 = static_cast<std::ptrdiff_t>(fl1);
    const double t1 = u1 - fl1;
    if (kind == Interp::linear) {
        const cplx a = (1.0 - t1) * sample_row(i0, i1) + t1 * sample_row(i0, i1 + 1);
        const cplx b = (1.0 - t1) * sample_row(i0 + 1, i1) + t1 * sample_row(i0 + 1, i1 + 1);
        return (1.0 - t0) * a + t0 * b;
    }
    const auto w0 = cubic_weights(t0);
    const auto w1 = cubic_weights(t1);
    cplx acc(0.0, 0.0);
    for (int r = 0; r < 4; ++r) {
        cplx row(0.0, 0.0);
        for (int c = 0; c < 4; ++c)
            row += w1[static_cast<std::size_t>(c)] * sample_row(i0 - 1 + r, i1 - 1 + c);
        acc += w0[static_cast<std::size_t>(r)] * row;
    }
    return acc;
}

}  // namespace detail

// Warp a sampled signal: output(x) = f(x - tau(x)) with periodic extension.
// Grid-aligned constant translations (shift = k * spacing per axis) are exact
// circular index shifts, which also makes tau = 0 a bit-exact copy. The
// standing hypothesis ||tau||_inf < 1/2 is enforced unless `override_hypothesis`.
inline Signal apply_deformation(const Signal& f, const DeformationField& tau,
                                Interp interp = Interp::linear, bool override_hypothesis = false) {
    if (tau.dim != f.grid.dim) throw std::invalid_argument("apply_deformation: dimension mismatch");
    if (!override_hypothesis && !(sup_norm(tau) < 0.5))
        throw std::invalid_argument("apply_deformation: ||tau||_inf >= 1/2 (pass override for counterexamples)");
    if (sup_norm(tau) == 0.0) return f;
    const Grid& g = f.grid;
    if (const auto* c = std::get_if<ConstantField>(&tau.field)) {
        std::array<std::ptrdiff_t, 2> shift_cells{0, 0};
        bool aligned = true;
        for (int a = 0; a < g.dim; ++a) {
            const double cells = c->shift[static_cast<std::size_t>(a)] / g.spacing;
            const double rounded = std::round(cells);
            if (std::abs(cells - rounded) > 1e-9) {
                aligned = false;
                break;
            }
            shift_cells[static_cast<std::size_t>(a)] = static_cast<std::ptrdiff_t>(rounded);
        }
        if (aligned) {
            if (shift_cells[0] == 0 && shift_cells[1] == 0) return f;
            Signal out(g);
            for (std::size_t i0 = 0; i0 < g.extent[0]; ++i0)
                for (std::size_t i1 = 0; i1 < g.extent[1]; ++i1) {
                    const std::size_t s0 = detail::wrap(static_cast<std::ptrdiff_t>(i0) - shift_cells[0], g.extent[0]);
                    const std::size_t s1 = g.dim == 2
                                               ? detail::wrap(static_cast<std::ptrdiff_t>(i1) - shift_cells[1], g.extent[1])
                                               : i1;
                    out.samples[g.index(i0, i1)] = f.samples[g.index(s0, s1)];
                }
            return out;
        }
    }
    Signal out(g);
    for (std::size_t i0 = 0; i0 < g.extent[0]; ++i0)
        for (std::size_t i1 = 0; i1 < g.extent[1]; ++i1) {
            const Coord x = g.point(i0, i1);
            const Coord t = tau.eval(x);
            const double u0 = (x[0] - t[0] - g.origin(0)) / g.spacing;
            const double u1 = g.dim == 2 ? (x[1] - t[1] - g.origin(1)) / g.spacing : 0.0;
            out.samples[g.index(i0, i1)] = detail::interp_axis1(f, u0, u1, interp);
        }
    return out;
}

// Warp an analytically-described source: sample f(x - tau(x)) exactly at
// every grid point. Used for cartoon and closed-form signals, where grid
// interpolation would blur the discontinuity and corrupt the decay law.
inline Signal warped_samples(const Grid& g, const std::function<cplx(const Coord&)>& source,
                             const DeformationField& tau) {
    if (tau.dim != g.dim) throw std::invalid_argument("warped_samples: dimension mismatch");
    return sample_function(g, [&](const Coord& x) {
        const Coord t = tau.eval(x);
        return source(Coord{x[0] - t[0], g.dim == 2 ? x[1] - t[1] : 0.0});
    });
}

inline Signal deform_cartoon(const CartoonSpec& spec, const DeformationField& tau, const Grid& g) {
    return warped_samples(g, [&](const Coord& y) { return cplx(spec.value(y, g.dim), 0.0); }, tau);
}

// ---------------------------------------------------------------------------
// Tube volume and the smooth-class constant
// ---------------------------------------------------------------------------

// Measure of the flip set {x : 1_B(x) != 1_B(x - tau(x))} by cell-center
// counting. Requires ||tau||_inf <= 1 (the hypothesis of the tube-volume bound).
inline double tube_volume(const Domain& domain, const DeformationField& tau, const Grid& grid) {
    if (domain.dim() != grid.dim) throw std::invalid_argument("tube_volume: dimension mismatch");
    if (!(sup_norm(tau) <= 1.0)) throw std::invalid_argument("tube_volume: requires ||tau||_inf <= 1");
    std::size_t count = 0;
    for (std::size_t i0 = 0; i0 < grid.extent[0]; ++i0)
        for (std::size_t i1 = 0; i1 < grid.extent[1]; ++i1) {
            const Coord x = grid.point(i0, i1);
            const Coord t = tau.eval(x);
            const Coord y{x[0] - t[0], grid.dim == 2 ? x[1] - t[1] : 0.0};
            if (domain.inside(x) != domain.inside(y)) ++count;
        }
    return static_cast<double>(count) * grid.cell_volume();
}

// D with D^2 = vol(B_1(0)) + 2^d || <.>^{-d} ||_2^2, evaluated by quadrature;
// the prefactor in ||f - F_tau f||_2 <= C D ||tau||_inf for decaying C^1
// functions. d=1: D^2 = 2 + 2*pi; d=2: D^2 = 5*pi.
inline double smooth_class_constant(int d) {
    if (d != 1 && d != 2) throw std::invalid_argument("smooth_class_constant: d must be 1 or 2");
    const double ball = d == 1 ? 2.0 : M_PI;  // pi^{d/2} / Gamma(d/2 + 1)
    double weight_sq;
    if (d == 1) {
        weight_sq = 2.0 * integrate_halfline([](double x) { return 1.0 / (1.0 + x * x); }, 1e-12);
    } else {
        weight_sq = integrate_halfline(
            [](double r) { return 2.0 * M_PI * r / ((1.0 + r * r) * (1.0 + r * r)); }, 1e-12);
    }
    return std::sqrt(ball + std::pow(2.0, d) * weight_sq);
}

}  // namespace scatstab
