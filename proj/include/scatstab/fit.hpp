#pragma once

// Scaling-exponent estimation: least-squares line fit in log-log coordinates.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace scatstab {

struct CurvePoint {
    double tau_sup = 0.0;
    double error = 0.0;
};

using Curve = std::vector<CurvePoint>;

struct ExponentFit {
    double alpha = 0.0;      // slope of log(error) vs log(tau_sup)
    double log_constant = 0.0;  // intercept; error ~ exp(log_constant) * tau^alpha
    double residual = 0.0;   // rms residual in log space
    double prefactor() const { return std::exp(log_constant); }
};

inline ExponentFit fit_decay_exponent(const Curve& curve) {
    if (curve.size() < 4) throw std::invalid_argument("fit_decay_exponent: need at least 4 rungs");
    const auto n = static_cast<double>(curve.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const CurvePoint& p : curve) {
        if (!(p.tau_sup > 0.0) || !(p.error > 0.0))
            throw std::invalid_argument("fit_decay_exponent: non-positive rung (degenerate fit)");
        const double x = std::log(p.tau_sup), y = std::log(p.error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_decay_exponent: rungs collapse to one abscissa");
    ExponentFit fit;
    fit.alpha = (n * sxy - sx * sy) / denom;
    fit.log_constant = (sy - fit.alpha * sx) / n;
    double ss = 0.0;
    for (const CurvePoint& p : curve) {
        const double r = std::log(p.error) - (fit.log_constant + fit.alpha * std::log(p.tau_sup));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

// Least-squares slope of y ~ c * x through the origin (used for the tube
// constant vol(S) ~ C * ||tau||_inf).
inline double fit_through_origin(const Curve& curve) {
    double num = 0.0, den = 0.0;
    for (const CurvePoint& p : curve) {
        num += p.tau_sup * p.error;
        den += p.tau_sup * p.tau_sup;
    }
    if (den == 0.0) throw std::invalid_argument("fit_through_origin: all abscissae zero");
    return num / den;
}

}  // namespace scatstab
