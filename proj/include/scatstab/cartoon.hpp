#pragma once

// Piecewise-smooth test functions: a smooth part plus a second smooth part
// switched on inside a compact region with C^2 boundary, together with the
// size bound that controls gradient decay, boundary measure and sup norm.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "scatstab/grid.hpp"
#include "scatstab/quadrature.hpp"
#include "scatstab/signal.hpp"

namespace scatstab {

// ---------------------------------------------------------------------------
// Smooth parts (closed-form value and gradient)
// ---------------------------------------------------------------------------

struct ConstantPart {
    double value = 0.0;
};

struct GaussianPart {
    double amplitude = 1.0;
    Coord center{0.0, 0.0};
    double sigma = 1.0;
};

// Plateau of height `amplitude` up to `plateau_radius`, then a cubic
// smoothstep falloff over `falloff_width`; C^1 with compact support.
struct PolyBumpPart {
    double amplitude = 1.0;
    Coord center{0.0, 0.0};
    double plateau_radius = 1.0;
    double falloff_width = 1.0;
};

struct SmoothPart;
struct MixturePart {
    std::vector<GaussianPart> components;
};

using SmoothVariant = std::variant<ConstantPart, GaussianPart, MixturePart, PolyBumpPart>;

struct SmoothPart {
    SmoothVariant part;

    static SmoothPart zero() { return SmoothPart{ConstantPart{0.0}}; }
    static SmoothPart constant(double v) { return SmoothPart{ConstantPart{v}}; }

    double value(const Coord& x, int dim) const;
    Coord gradient(const Coord& x, int dim) const;
    bool is_zero() const {
        if (const auto* c = std::get_if<ConstantPart>(&part)) return c->value == 0.0;
        return false;
    }
};

namespace detail {

inline double sq_dist(const Coord& x, const Coord& c, int dim) {
    double d = (x[0] - c[0]) * (x[0] - c[0]);
    if (dim == 2) d += (x[1] - c[1]) * (x[1] - c[1]);
    return d;
}

inline double gaussian_value(const GaussianPart& g, const Coord& x, int dim) {
    return g.amplitude * std::exp(-0.5 * sq_dist(x, g.center, dim) / (g.sigma * g.sigma));
}

inline Coord gaussian_gradient(const GaussianPart& g, const Coord& x, int dim) {
    const double v = gaussian_value(g, x, dim);
    const double s2 = g.sigma * g.sigma;
    Coord out{-v * (x[0] - g.center[0]) / s2, 0.0};
    if (dim == 2) out[1] = -v * (x[1] - g.center[1]) / s2;
    return out;
}

}  // namespace detail

inline double SmoothPart::value(const Coord& x, int dim) const {
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantPart>) {
                return p.value;
            } else if constexpr (std::is_same_v<T, GaussianPart>) {
                return detail::gaussian_value(p, x, dim);
            } else if constexpr (std::is_same_v<T, MixturePart>) {
                double acc = 0.0;
                for (const GaussianPart& g : p.components) acc += detail::gaussian_value(g, x, dim);
                return acc;
            } else {
                const double r = std::sqrt(detail::sq_dist(x, p.center, dim));
                const double t = (r - p.plateau_radius) / p.falloff_width;
                if (t <= 0.0) return p.amplitude;
                if (t >= 1.0) return 0.0;
                return p.amplitude * (1.0 - t * t * (3.0 - 2.0 * t));
            }
        },
        part);
}

inline Coord SmoothPart::gradient(const Coord& x, int dim) const {
    return std::visit(
        [&](const auto& p) -> Coord {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantPart>) {
                return Coord{0.0, 0.0};
            } else if constexpr (std::is_same_v<T, GaussianPart>) {
                return detail::gaussian_gradient(p, x, dim);
            } else if constexpr (std::is_same_v<T, MixturePart>) {
                Coord acc{0.0, 0.0};
                for (const GaussianPart& g : p.components) {
                    const Coord gg = detail::gaussian_gradient(g, x, dim);
                    acc[0] += gg[0];
                    acc[1] += gg[1];
                }
                return acc;
            } else {
                const double r = std::sqrt(detail::sq_dist(x, p.center, dim));
                const double t = (r - p.plateau_radius) / p.falloff_width;
                if (t <= 0.0 || t >= 1.0 || r == 0.0) return Coord{0.0, 0.0};
                const double slope = p.amplitude * (-6.0 * t * (1.0 - t)) / p.falloff_width;
                Coord out{slope * (x[0] - p.center[0]) / r, 0.0};
                if (dim == 2) out[1] = slope * (x[1] - p.center[1]) / r;
                return out;
            }
        },
        part);
}

// ---------------------------------------------------------------------------
// Compact domains with C^2 boundary
// ---------------------------------------------------------------------------

struct IntervalDomain {
    double lo = -1.0, hi = 1.0;  // d = 1
};

struct DiscDomain {
    Coord center{0.0, 0.0};
    double radius = 1.0;
};

struct EllipseDomain {
    Coord center{0.0, 0.0};
    double semi_a = 1.0;  // axis 0
    double semi_b = 1.0;  // axis 1
};

// Star-shaped region with radius r(theta) = r0 + sum_m (c_m cos(m th) +
// s_m sin(m th)); a finite trigonometric polynomial, hence C^infinity.
struct StarDomain {
    Coord center{0.0, 0.0};
    double r0 = 1.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;

    double radius_at(double theta) const {
        double r = r0;
        for (std::size_t m = 0; m < cos_coeffs.size(); ++m) r += cos_coeffs[m] * std::cos(double(m + 1) * theta);
        for (std::size_t m = 0; m < sin_coeffs.size(); ++m) r += sin_coeffs[m] * std::sin(double(m + 1) * theta);
        return r;
    }

    double radius_deriv_at(double theta) const {
        double r = 0.0;
        for (std::size_t m = 0; m < cos_coeffs.size(); ++m)
            r -= cos_coeffs[m] * double(m + 1) * std::sin(double(m + 1) * theta);
        for (std::size_t m = 0; m < sin_coeffs.size(); ++m)
            r += sin_coeffs[m] * double(m + 1) * std::cos(double(m + 1) * theta);
        return r;
    }
};

using DomainVariant = std::variant<IntervalDomain, DiscDomain, EllipseDomain, StarDomain>;

struct Domain {
    DomainVariant shape;

    int dim() const { return std::holds_alternative<IntervalDomain>(shape) ? 1 : 2; }

    bool inside(const Coord& x) const {
        return std::visit(
            [&](const auto& s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, IntervalDomain>) {
                    return x[0] >= s.lo && x[0] <= s.hi;
                } else if constexpr (std::is_same_v<T, DiscDomain>) {
                    return detail::sq_dist(x, s.center, 2) <= s.radius * s.radius;
                } else if constexpr (std::is_same_v<T, EllipseDomain>) {
                    const double u = (x[0] - s.center[0]) / s.semi_a;
                    const double v = (x[1] - s.center[1]) / s.semi_b;
                    return u * u + v * v <= 1.0;
                } else {
                    const double dx = x[0] - s.center[0], dy = x[1] - s.center[1];
                    const double r = std::hypot(dx, dy);
                    if (r == 0.0) return true;
                    return r <= s.radius_at(std::atan2(dy, dx));
                }
            },
            shape);
    }

    // Radius of a ball around the origin containing the domain.
    double bounding_radius() const {
        return std::visit(
            [&](const auto& s) -> double {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, IntervalDomain>) {
                    return std::max(std::abs(s.lo), std::abs(s.hi));
                } else if constexpr (std::is_same_v<T, DiscDomain>) {
                    return std::hypot(s.center[0], s.center[1]) + s.radius;
                } else if constexpr (std::is_same_v<T, EllipseDomain>) {
                    return std::hypot(s.center[0], s.center[1]) + std::max(s.semi_a, s.semi_b);
                } else {
                    double rmax = 0.0;
                    for (int k = 0; k < 4096; ++k)
                        rmax = std::max(rmax, s.radius_at(2.0 * M_PI * k / 4096.0));
                    return std::hypot(s.center[0], s.center[1]) + rmax;
                }
            },
            shape);
    }

    void validate() const {
        if (const auto* iv = std::get_if<IntervalDomain>(&shape)) {
            if (!(iv->hi > iv->lo)) throw std::invalid_argument("Domain: interval needs hi > lo");
        } else if (const auto* d = std::get_if<DiscDomain>(&shape)) {
            if (!(d->radius > 0.0)) throw std::invalid_argument("Domain: disc radius must be positive");
        } else if (const auto* e = std::get_if<EllipseDomain>(&shape)) {
            if (!(e->semi_a > 0.0) || !(e->semi_b > 0.0))
                throw std::invalid_argument("Domain: ellipse semi-axes must be positive");
        } else if (const auto* st = std::get_if<StarDomain>(&shape)) {
            double wiggle = 0.0;
            for (double c : st->cos_coeffs) wiggle += std::abs(c);
            for (double c : st->sin_coeffs) wiggle += std::abs(c);
            if (!(st->r0 > wiggle))
                throw std::invalid_argument("Domain: star radius can reach zero (r0 <= sum |coeffs|)");
        }
    }
};

// Boundary measure: endpoint count (= 2) for an interval, closed-form
// perimeter for a disc, adaptive quadrature of the parametrized speed for
// ellipses and star shapes (relative error <= 1e-6).
inline double boundary_length(const Domain& domain) {
    domain.validate();
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, IntervalDomain>) {
                return 2.0;
            } else if constexpr (std::is_same_v<T, DiscDomain>) {
                return 2.0 * M_PI * s.radius;
            } else if constexpr (std::is_same_v<T, EllipseDomain>) {
                auto speed = [&s](double t) {
                    const double dx = -s.semi_a * std::sin(t), dy = s.semi_b * std::cos(t);
                    return std::hypot(dx, dy);
                };
                return integrate(speed, 0.0, 2.0 * M_PI, 1e-9);
            } else {
                auto speed = [&s](double t) {
                    const double r = s.radius_at(t), dr = s.radius_deriv_at(t);
                    return std::hypot(r, dr);
                };
                return integrate(speed, 0.0, 2.0 * M_PI, 1e-9);
            }
        },
        domain.shape);
}

// ---------------------------------------------------------------------------
// Cartoon specs
// ---------------------------------------------------------------------------

struct CartoonSpec {
    SmoothPart f1;
    SmoothPart f2;
    Domain domain;
    double declared_size = 0.0;  // K

    double value(const Coord& x, int dim) const {
        double v = f1.value(x, dim);
        if (domain.inside(x)) v += f2.value(x, dim);
        return v;
    }
};

struct DecayCheck {
    bool pass = true;
    Coord violation_point{0.0, 0.0};
    double gradient_norm = 0.0;  // |grad f| at the violation
    double allowed = 0.0;        // K <x>^{-d} there
};

namespace detail {

// Visit grid coordinates plus a 4x oversampled set covering the same domain.
template <typename Fn>
inline void dense_coords(const Grid& g, Fn&& fn) {
    for (int level = 0; level < 2; ++level) {
        const std::size_t mul = level == 0 ? 1 : 4;
        const double step = g.spacing / static_cast<double>(mul);
        const std::size_t n0 = g.extent[0] * mul;
        const std::size_t n1 = g.dim == 2 ? g.extent[1] * mul : 1;
        for (std::size_t i0 = 0; i0 < n0; ++i0) {
            const double x0 = g.origin(0) + static_cast<double>(i0) * step;
            for (std::size_t i1 = 0; i1 < n1; ++i1) {
                Coord x{x0, g.dim == 2 ? g.origin(1) + static_cast<double>(i1) * step : 0.0};
                fn(x);
            }
        }
    }
}

inline double gradient_norm(const SmoothPart& p, const Coord& x, int dim) {
    const Coord gr = p.gradient(x, dim);
    return dim == 2 ? std::hypot(gr[0], gr[1]) : std::abs(gr[0]);
}

}  // namespace detail

// Check |grad f(x)| <= K <x>^{-d} on the grid plus a 4x oversampled set.
inline DecayCheck verify_decay(const SmoothPart& part, double K, const Grid& grid) {
    if (!(K > 0.0)) throw std::invalid_argument("verify_decay: K must be positive");
    DecayCheck res;
    detail::dense_coords(grid, [&](const Coord& x) {
        if (!res.pass) return;
        const double gn = detail::gradient_norm(part, x, grid.dim);
        const double allowed = K * std::pow(japanese_bracket(x, grid.dim), -grid.dim);
        if (gn > allowed) res = DecayCheck{false, x, gn, allowed};
    });
    return res;
}

// Smallest size bound consistent with the spec on this grid: the max of the
// measured decay constants of both smooth parts, the boundary measure, and
// the sup of |f2|.
inline double estimate_size(const SmoothPart& f1, const SmoothPart& f2, const Domain& domain,
                            const Grid& grid) {
    double decay = 0.0, sup_f2 = 0.0;
    detail::dense_coords(grid, [&](const Coord& x) {
        const double w = std::pow(japanese_bracket(x, grid.dim), grid.dim);
        decay = std::max(decay, detail::gradient_norm(f1, x, grid.dim) * w);
        decay = std::max(decay, detail::gradient_norm(f2, x, grid.dim) * w);
        sup_f2 = std::max(sup_f2, std::abs(f2.value(x, grid.dim)));
    });
    const bool trivial = f1.is_zero() && f2.is_zero();
    return trivial ? 0.0 : std::max({decay, boundary_length(domain), sup_f2});
}

inline double estimate_size(const CartoonSpec& spec, const Grid& grid) {
    return estimate_size(spec.f1, spec.f2, spec.domain, grid);
}

// Validate a declared size K against the class conditions.
inline void validate_cartoon(const CartoonSpec& spec, const Grid& grid) {
    if (spec.domain.dim() != grid.dim)
        throw std::invalid_argument("CartoonSpec: domain dimension does not match grid");
    spec.domain.validate();
    if (spec.declared_size > 0.0) {
        const DecayCheck c1 = verify_decay(spec.f1, spec.declared_size, grid);
        if (!c1.pass) throw std::invalid_argument("CartoonSpec: f1 violates the gradient decay bound");
        const DecayCheck c2 = verify_decay(spec.f2, spec.declared_size, grid);
        if (!c2.pass) throw std::invalid_argument("CartoonSpec: f2 violates the gradient decay bound");
        if (boundary_length(spec.domain) > spec.declared_size)
            throw std::invalid_argument("CartoonSpec: boundary measure exceeds declared size");
    }
}

// Pointwise sampling f1(x) + 1_B(x) f2(x); a sample is inside iff its cell
// center is inside (no antialiasing), keeping indicators exact.
inline Signal sample_cartoon(const CartoonSpec& spec, const Grid& grid) {
    if (spec.domain.dim() != grid.dim)
        throw std::invalid_argument("sample_cartoon: domain dimension does not match grid");
    const double safe = 0.5 * grid.half_width(0);
    if (spec.domain.bounding_radius() > safe)
        throw std::invalid_argument("sample_cartoon: domain exceeds the central half of the grid");
    return sample_function(grid, [&](const Coord& x) { return cplx(spec.value(x, grid.dim), 0.0); });
}

}  // namespace scatstab
