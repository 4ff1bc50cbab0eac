#include <catch2/catch_amalgamated.hpp>

#include "scatstab/cartoon.hpp"
#include "scatstab/deform.hpp"
#include "scatstab/fit.hpp"

#include "oracles.hpp"

using namespace scatstab;

namespace {

Signal indicator_1d(const Grid& g, double lo, double hi) {
    return sample_function(g, [&](const Coord& x) {
        return (x[0] >= lo && x[0] <= hi) ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
    });
}

// closed-form area of the intersection of two unit-radius discs at distance s
double disc_lens_area(double r, double s) {
    return 2.0 * r * r * std::acos(s / (2.0 * r)) - 0.5 * s * std::sqrt(4.0 * r * r - s * s);
}

}  // namespace

TEST_CASE("field sup norms") {
    REQUIRE(sup_norm(make_translation(1, {0.3, 0.0})) == 0.3);
    REQUIRE(sup_norm(make_translation(2, {0.3, 0.4})) == Catch::Approx(0.5));
    REQUIRE(sup_norm(make_translation(1, {0.0, 0.0})) == 0.0);
    REQUIRE(sup_norm(make_gaussian_bump(1, 0.2)) == 0.2);
    SECTION("random field rescales to the requested amplitude") {
        const DeformationField f = make_smooth_random_field(1, 0.15, 5, 2, 16.0);
        // independent dense measurement
        double sup = 0.0;
        for (int i = 0; i < 60000; ++i) {
            const double x = -8.0 + 16.0 * double(i) / 60000.0;
            sup = std::max(sup, std::abs(f.eval({x, 0.0})[0]));
        }
        REQUIRE(sup == Catch::Approx(0.15).margin(0.15 * 0.02));
        REQUIRE(sup_norm(f) == Catch::Approx(0.15).margin(0.15 * 0.02));
    }
}

TEST_CASE("jacobian sup norms") {
    REQUIRE(jacobian_sup(make_translation(2, {0.2, 0.1})) == 0.0);
    SECTION("gaussian bump has the calculus maximum a sqrt(2) e^{-1/2}") {
        const double a = 0.3;
        const DeformationField f = make_gaussian_bump(1, a);
        REQUIRE(jacobian_sup(f) == Catch::Approx(a * std::sqrt(2.0) * std::exp(-0.5)).epsilon(1e-12));
        // dense finite-difference cross-check
        double sup = 0.0;
        for (int i = 0; i < 20000; ++i) {
            const double x = -5.0 + 10.0 * double(i) / 20000.0;
            const double h = 1e-6;
            sup = std::max(sup, std::abs(f.eval({x + h, 0.0})[0] - f.eval({x - h, 0.0})[0]) / (2 * h));
        }
        REQUIRE(sup == Catch::Approx(jacobian_sup(f)).epsilon(1e-4));
    }
    SECTION("random field rescaled to a target jacobian sup") {
        // derivatives scale linearly with the amplitude, so dividing the
        // target by the unit-amplitude measurement lands on it
        const DeformationField unit = make_smooth_random_field(1, 1.0, 5, 2, 16.0);
        const double per_unit = jacobian_sup(unit);
        const double target = 0.2;
        const DeformationField scaled = make_smooth_random_field(1, target / per_unit, 5, 2, 16.0);
        REQUIRE(jacobian_sup(scaled) == Catch::Approx(target).margin(0.02 * target));
    }
    SECTION("random field jacobian agrees with finite differences") {
        const DeformationField f = make_smooth_random_field(2, 0.1, 9, 1, 8.0);
        const Coord x{0.73, -1.21};
        const Jacobian J = f.jacobian(x);
        const double h = 1e-6;
        for (int j = 0; j < 2; ++j) {
            Coord xp = x, xm = x;
            xp[static_cast<std::size_t>(j)] += h;
            xm[static_cast<std::size_t>(j)] -= h;
            const Coord tp = f.eval(xp), tm = f.eval(xm);
            for (int i = 0; i < 2; ++i) {
                const double fd =
                    (tp[static_cast<std::size_t>(i)] - tm[static_cast<std::size_t>(i)]) / (2.0 * h);
                REQUIRE(J[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ==
                        Catch::Approx(fd).margin(1e-6));
            }
        }
    }
}

TEST_CASE("apply_deformation") {
    Grid g = Grid::line(8192, std::pow(2.0, -10.0));  // [-4, 4)
    SECTION("zero field returns the signal bit-exactly") {
        const Signal f = oracles::random_signal(g, 3);
        REQUIRE(apply_deformation(f, make_translation(1, {0.0, 0.0})).samples == f.samples);
        REQUIRE(apply_deformation(f, make_gaussian_bump(1, 0.0)).samples == f.samples);
    }
    SECTION("grid-aligned translation is an exact circular shift") {
        const Signal f = oracles::random_signal(g, 4);
        const double s = 16.0 * g.spacing;
        const Signal out = apply_deformation(f, make_translation(1, {s, 0.0}));
        for (std::size_t i = 16; i < g.extent[0]; ++i) REQUIRE(out.samples[i] == f.samples[i - 16]);
    }
    SECTION("translated box matches sqrt(2 s)") {
        const Signal f = indicator_1d(g, -1.0, 1.0);
        const double s = 0.125;
        const Signal out = apply_deformation(f, make_translation(1, {s, 0.0}));
        const double err = l2_distance(f, out);
        REQUIRE(std::abs(err - std::sqrt(2.0 * s)) <= 0.02 * std::sqrt(2.0 * s));
    }
    SECTION("concentrated supports separate to sqrt(2)") {
        const double s = 1.0 / 64.0;
        // unit-energy box on [-s/2, s/2] (offset half a cell off the lattice)
        Signal f = indicator_1d(g, -0.5 * s + 0.49 * g.spacing, 0.5 * s + 0.49 * g.spacing);
        const double n = l2_norm(f);
        for (cplx& v : f.samples) v /= n;
        const Signal out = apply_deformation(f, make_translation(1, {s, 0.0}));
        REQUIRE(l2_distance(f, out) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-12));
    }
    SECTION("two aligned translations compose exactly") {
        const Signal f = oracles::random_signal(g, 6);
        const double s1 = 8.0 * g.spacing, s2 = 24.0 * g.spacing;
        const Signal two = apply_deformation(apply_deformation(f, make_translation(1, {s1, 0.0})),
                                             make_translation(1, {s2, 0.0}));
        const Signal one = apply_deformation(f, make_translation(1, {s1 + s2, 0.0}));
        REQUIRE(two.samples == one.samples);
    }
    SECTION("the standing hypothesis is enforced unless overridden") {
        const Signal f = oracles::random_signal(g, 7);
        REQUIRE_THROWS_AS(apply_deformation(f, make_translation(1, {0.75, 0.0})), std::invalid_argument);
        REQUIRE_NOTHROW(apply_deformation(f, make_translation(1, {0.75, 0.0}), Interp::linear, true));
    }
    SECTION("linear and cubic interpolation agree on smooth content") {
        Grid h = Grid::line(2048, std::pow(2.0, -8.0));
        const Signal f = sample_function(h, [](const Coord& x) {
            return cplx(std::exp(-x[0] * x[0]), 0.0);
        });
        const DeformationField tau = make_gaussian_bump(1, 0.05);
        const Signal lin = apply_deformation(f, tau, Interp::linear);
        const Signal cub = apply_deformation(f, tau, Interp::cubic);
        const Signal exact = warped_samples(h, [](const Coord& y) {
            return cplx(std::exp(-y[0] * y[0]), 0.0);
        }, tau);
        REQUIRE(l2_distance(lin, exact) <= 1e-4);
        REQUIRE(l2_distance(cub, exact) <= l2_distance(lin, exact));
    }
    SECTION("2-d bilinear warp matches the analytic warp on smooth content") {
        Grid p = Grid::plane(256, 256, 1.0 / 32.0);
        auto src = [](const Coord& y) {
            return cplx(std::exp(-(y[0] * y[0] + y[1] * y[1])), 0.0);
        };
        const Signal f = sample_function(p, src);
        const DeformationField tau = make_smooth_random_field(2, 0.05, 12, 1, 16.0);
        const Signal warped = apply_deformation(f, tau, Interp::linear);
        const Signal exact = warped_samples(p, src, tau);
        REQUIRE(l2_distance(warped, exact) <= 1e-3);
    }
}

TEST_CASE("tube_volume") {
    SECTION("interval flip set has volume 2s exactly") {
        Grid g = Grid::line(8192, std::pow(2.0, -10.0));
        Domain d{IntervalDomain{-1.0, 1.0}};
        for (double s : {0.25, 0.125, 0.03125}) {
            const double vol = tube_volume(d, make_translation(1, {s, 0.0}), g);
            REQUIRE(std::abs(vol - 2.0 * s) <= g.spacing + 1e-12);
        }
    }
    SECTION("zero field flips nothing") {
        Grid g = Grid::line(256, 1.0 / 32.0);
        Domain d{IntervalDomain{-1.0, 1.0}};
        REQUIRE(tube_volume(d, make_translation(1, {0.0, 0.0}), g) == 0.0);
    }
    SECTION("disc flip set matches the lens formula within 3%") {
        Grid g = Grid::plane(2048, 2048, 1.0 / 256.0);  // [-4, 4)^2
        Domain d{DiscDomain{{0.0, 0.0}, 1.0}};
        for (double s : {0.25, 0.125}) {
            const double vol = tube_volume(d, make_translation(2, {s, 0.0}), g);
            const double want = 2.0 * (M_PI - disc_lens_area(1.0, s));
            REQUIRE(std::abs(vol - want) <= 0.03 * want);
        }
    }
    SECTION("hypothesis ||tau||_inf <= 1 is enforced") {
        Grid g = Grid::line(128, 1.0 / 16.0);
        Domain d{IntervalDomain{-1.0, 1.0}};
        REQUIRE_THROWS_AS(tube_volume(d, make_translation(1, {1.5, 0.0}), g), std::invalid_argument);
    }
}

TEST_CASE("indicator deformation errors obey the fitted tube constant") {
    // squared error = flip volume <= C * s across the translation family,
    // with the fitted C within a factor 4 of 2 * boundary measure
    SECTION("interval") {
        Grid g = Grid::line(8192, std::pow(2.0, -10.0));
        Domain d{IntervalDomain{-1.0, 1.0}};
        Curve flips;
        for (double s : {0.25, 0.125, 0.0625, 0.03125})
            flips.push_back(CurvePoint{s, tube_volume(d, make_translation(1, {s, 0.0}), g)});
        const double C = fit_through_origin(flips);
        for (const CurvePoint& p : flips) REQUIRE(p.error <= C * p.tau_sup * 1.01);
        const double ref = 2.0 * boundary_length(d);
        REQUIRE(C >= ref / 4.0);
        REQUIRE(C <= ref * 4.0);
    }
    SECTION("disc") {
        Grid g = Grid::plane(1024, 1024, std::pow(2.0, -7.0));
        Domain d{DiscDomain{{0.0, 0.0}, 1.0}};
        Curve flips;
        for (double s : {0.25, 0.125, 0.0625})
            flips.push_back(CurvePoint{s, tube_volume(d, make_translation(2, {s, 0.0}), g)});
        const double C = fit_through_origin(flips);
        for (const CurvePoint& p : flips) REQUIRE(p.error <= C * p.tau_sup * 1.01);
        const double ref = 2.0 * boundary_length(d);
        REQUIRE(C >= ref / 4.0);
        REQUIRE(C <= ref * 4.0);
    }
}

TEST_CASE("smooth_class_constant matches the analytic values") {
    REQUIRE(smooth_class_constant(1) * smooth_class_constant(1) == Catch::Approx(2.0 + 2.0 * M_PI).epsilon(1e-6));
    REQUIRE(smooth_class_constant(2) * smooth_class_constant(2) == Catch::Approx(5.0 * M_PI).epsilon(1e-6));
}

TEST_CASE("smooth-part deformation errors obey the linear law") {
    Grid g = Grid::line(4096, std::pow(2.0, -9.0));
    const SmoothPart f{GaussianPart{1.0, {0.0, 0.0}, 1.0}};
    // measured decay constant of the gaussian
    double C = 0.0;
    for (int i = 0; i < 40000; ++i) {
        const double x = -4.0 + 8.0 * double(i) / 40000.0;
        C = std::max(C, std::abs(f.gradient({x, 0.0}, 1)[0]) * japanese_bracket(Coord{x, 0.0}, 1));
    }
    const double D = smooth_class_constant(1);
    auto src = [&f](const Coord& y) { return cplx(f.value(y, 1), 0.0); };
    const Signal base = sample_function(g, src);
    for (double s : {0.4, 0.2, 0.1, 0.05}) {
        for (const DeformationField& tau :
             {make_translation(1, {s, 0.0}), make_gaussian_bump(1, s),
              make_smooth_random_field(1, s, 21, 2, 16.0)}) {
            const double err = l2_distance(base, warped_samples(g, src, tau));
            REQUIRE(err <= C * D * s * 1.05);
        }
    }
}

TEST_CASE("cartoon deformation error decouples into its three terms") {
    Grid g = Grid::line(4096, std::pow(2.0, -9.0));
    CartoonSpec spec;
    spec.f1 = SmoothPart{GaussianPart{0.6, {-0.4, 0.0}, 0.5}};
    spec.f2 = SmoothPart{GaussianPart{1.2, {0.2, 0.0}, 0.8}};
    spec.domain.shape = IntervalDomain{-1.0, 1.0};
    auto f1 = [&](const Coord& y) { return cplx(spec.f1.value(y, 1), 0.0); };
    auto f2 = [&](const Coord& y) { return cplx(spec.f2.value(y, 1), 0.0); };
    auto ind = [&](const Coord& y) { return cplx(spec.domain.inside(y) ? 1.0 : 0.0, 0.0); };
    const Signal base = sample_cartoon(spec, g);
    const Signal b1 = sample_function(g, f1), b2 = sample_function(g, f2), bi = sample_function(g, ind);
    double sup_f2 = 0.0;
    for (const cplx& v : b2.samples) sup_f2 = std::max(sup_f2, std::abs(v));
    for (double s : {0.3, 0.15, 0.05}) {
        for (const DeformationField& tau :
             {make_translation(1, {s, 0.0}), make_smooth_random_field(1, s, 33, 2, 16.0)}) {
            const double whole = l2_distance(base, deform_cartoon(spec, tau, g));
            const double t1 = l2_distance(b1, warped_samples(g, f1, tau));
            const double t2 = l2_distance(b2, warped_samples(g, f2, tau));
            const double ti = l2_distance(bi, warped_samples(g, ind, tau));
            REQUIRE(whole <= t1 + t2 + ti * sup_f2 + 1e-12);
        }
    }
}
