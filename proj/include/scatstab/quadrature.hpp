#pragma once

// Adaptive Simpson quadrature for the handful of 1-d integrals the library
// needs (arc lengths, decay-weight norms).

#include <cmath>
#include <functional>
#include <stdexcept>

namespace scatstab {

namespace detail {

inline double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                                   double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-10,
                        int max_depth = 40) {
    if (!(b > a)) throw std::invalid_argument("integrate: requires b > a");
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = detail::simpson(a, b, fa, fm, fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Integral of f over [0, inf) via the substitution x = t/(1-t).
inline double integrate_halfline(const std::function<double(double)>& f, double tol = 1e-10) {
    auto g = [&f](double t) {
        const double omt = 1.0 - t;
        const double x = t / omt;
        return f(x) / (omt * omt);
    };
    // Stay strictly inside (0,1); the integrands used here remain bounded, so
    // the clipped tails contribute O(1e-14).
    return integrate(g, 1e-14, 1.0 - 1e-14, tol);
}

}  // namespace scatstab
