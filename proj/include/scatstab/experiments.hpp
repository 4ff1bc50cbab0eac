#pragma once

// Experiment orchestration: signal sources, extractor construction from
// config, deformation ladders, stability curves, per-experiment assertions,
// and CSV/SVG reporting.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "scatstab/cartoon.hpp"
#include "scatstab/config.hpp"
#include "scatstab/deform.hpp"
#include "scatstab/fit.hpp"
#include "scatstab/frames.hpp"
#include "scatstab/io.hpp"
#include "scatstab/network.hpp"
#include "scatstab/report.hpp"
#include "scatstab/rng.hpp"
#include "scatstab/signal.hpp"

namespace scatstab {

// ---------------------------------------------------------------------------
// Config model
// ---------------------------------------------------------------------------

enum class ExperimentKind { sharpness, concentrated, cartoon, smooth, bandlimited, deform };

inline ExperimentKind experiment_from_string(const std::string& s) {
    if (s == "sharpness") return ExperimentKind::sharpness;
    if (s == "concentrated") return ExperimentKind::concentrated;
    if (s == "cartoon") return ExperimentKind::cartoon;
    if (s == "smooth") return ExperimentKind::smooth;
    if (s == "bandlimited") return ExperimentKind::bandlimited;
    if (s == "deform") return ExperimentKind::deform;
    throw ConfigError("unknown experiment '" + s + "'");
}

struct BankSpec {
    std::string kind = "delta";  // delta|wavelet|gabor|random
    std::size_t scales = 3;
    Mother mother = Mother::morlet;
    double width = 1.0;
    std::vector<double> frequencies;  // gabor centers (flat list; pairs when dim == 2)
    std::size_t count = 4;
    std::uint64_t seed = 1;
    double smoothness = 1.0;
    double scale = 1.0;  // deliberate atom rescaling (admissibility studies)
};

struct ModuleSpec {
    BankSpec bank;
    NonlinKind nonlinearity = NonlinKind::identity;
    std::size_t subsampling = 1;
};

struct ExtractorSpec {
    std::size_t depth = 0;
    bool normalize = true;
    std::vector<ModuleSpec> modules;  // replicated if fewer than depth+1

    bool is_identity() const {
        return depth == 0 && modules.size() == 1 && modules[0].bank.kind == "delta" &&
               modules[0].nonlinearity == NonlinKind::identity && modules[0].subsampling == 1;
    }
};

struct DeformSpec {
    std::string kind = "translation";  // translation|bump|smoothrandom
    Coord direction{1.0, 0.0};
    double ladder_start = 0.25;
    std::size_t ladder_count = 7;
    double ladder_ratio = 0.5;
    std::uint64_t seed = 7;
    int max_wavenumber = 1;
    double period = 16.0;
    JacobianNorm jacobian_norm = JacobianNorm::max_entry;
    bool counterexample = false;  // lifts the ||tau||_inf < 1/2 precondition
};

struct SignalSpec {
    std::string kind = "cartoon";  // cartoon|smooth|bandlimited|pgm|concentrated
    CartoonSpec cartoon;
    SmoothPart smooth;
    double bandwidth = 16.0;
    std::uint64_t seed = 3;
    std::string pgm_path;
};

struct Windows {
    std::optional<double> alpha_min, alpha_max;
    std::optional<double> prefactor_min, prefactor_max;
    double rung_rel_tol = 0.02;
    double decoupling_tol = 1e-8;
    double smooth_slack = 1.05;
    double growth_min = 1.5, growth_max = 2.5;
};

struct BandlimitedSpec {
    std::string mode = "growth";  // growth|rate
    std::vector<double> bandwidths{4.0, 8.0, 16.0, 32.0, 64.0};
    double tau = 0.005;
};

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::deform;
    Grid grid;
    std::uint64_t seed = 1;
    std::string outdir = "out";
    SignalSpec signal;
    ExtractorSpec extractor;
    DeformSpec deformation;
    Windows windows;
    BandlimitedSpec bandlimited;
    Interp interp = Interp::linear;
    bool parallel = true;
};

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace detail {

inline Coord read_direction(ConfigCursor& c, const std::string& key, int dim) {
    if (!c.has(key)) return Coord{1.0, 0.0};
    const std::vector<double> v = c.get_doubles(key);
    if (static_cast<int>(v.size()) != dim) throw ConfigError("'" + key + "' needs " + std::to_string(dim) + " components");
    return Coord{v[0], dim == 2 ? v[1] : 0.0};
}

inline SmoothPart read_smooth_part(ConfigCursor c, int dim) {
    const std::string kind = c.get_string("kind");
    SmoothPart out = SmoothPart::zero();
    if (kind == "zero") {
        // nothing to read
    } else if (kind == "constant") {
        out = SmoothPart::constant(c.get_double("value"));
    } else if (kind == "gaussian") {
        GaussianPart g;
        g.amplitude = c.get_double("amplitude", 1.0);
        g.sigma = c.get_double("sigma", 1.0);
        g.center = read_direction(c, "center", dim);
        if (!c.has("center")) g.center = Coord{0.0, 0.0};
        out = SmoothPart{g};
    } else if (kind == "mixture") {
        MixturePart m;
        for (ConfigCursor gc : c.blocks("component")) {
            GaussianPart g;
            g.amplitude = gc.get_double("amplitude", 1.0);
            g.sigma = gc.get_double("sigma", 1.0);
            g.center = read_direction(gc, "center", dim);
            if (!gc.has("center")) g.center = Coord{0.0, 0.0};
            gc.finish();
            m.components.push_back(g);
        }
        if (m.components.empty()) throw ConfigError("mixture needs at least one 'component' block");
        out = SmoothPart{m};
    } else if (kind == "polybump") {
        PolyBumpPart p;
        p.amplitude = c.get_double("amplitude", 1.0);
        p.plateau_radius = c.get_double("plateau_radius");
        p.falloff_width = c.get_double("falloff_width");
        p.center = read_direction(c, "center", dim);
        if (!c.has("center")) p.center = Coord{0.0, 0.0};
        out = SmoothPart{p};
    } else {
        throw ConfigError("unknown smooth part kind '" + kind + "'");
    }
    c.finish();
    return out;
}

inline Domain read_domain(ConfigCursor c, int dim) {
    const std::string kind = c.get_string("kind");
    Domain out;
    if (kind == "interval") {
        if (dim != 1) throw ConfigError("interval domains require dim = 1");
        out.shape = IntervalDomain{c.get_double("lo"), c.get_double("hi")};
    } else if (kind == "disc") {
        if (dim != 2) throw ConfigError("disc domains require dim = 2");
        DiscDomain d;
        d.radius = c.get_double("radius");
        d.center = read_direction(c, "center", 2);
        if (!c.has("center")) d.center = Coord{0.0, 0.0};
        out.shape = d;
    } else if (kind == "ellipse") {
        if (dim != 2) throw ConfigError("ellipse domains require dim = 2");
        EllipseDomain e;
        e.semi_a = c.get_double("semi_a");
        e.semi_b = c.get_double("semi_b");
        e.center = read_direction(c, "center", 2);
        if (!c.has("center")) e.center = Coord{0.0, 0.0};
        out.shape = e;
    } else if (kind == "star") {
        if (dim != 2) throw ConfigError("star domains require dim = 2");
        StarDomain s;
        s.r0 = c.get_double("r0");
        if (c.has("cos_coeffs")) s.cos_coeffs = c.get_doubles("cos_coeffs");
        if (c.has("sin_coeffs")) s.sin_coeffs = c.get_doubles("sin_coeffs");
        s.center = read_direction(c, "center", 2);
        if (!c.has("center")) s.center = Coord{0.0, 0.0};
        out.shape = s;
    } else {
        throw ConfigError("unknown domain kind '" + kind + "'");
    }
    out.validate();
    c.finish();
    return out;
}

inline BankSpec read_bank(ConfigCursor c) {
    BankSpec b;
    b.kind = c.get_string("kind");
    if (b.kind == "wavelet") {
        b.scales = static_cast<std::size_t>(c.get_int("scales", 3));
        b.mother = mother_from_string(c.get_string("mother", "morlet"));
    } else if (b.kind == "gabor") {
        b.width = c.get_double("width", 1.0);
        if (c.has("frequencies")) b.frequencies = c.get_doubles("frequencies");
    } else if (b.kind == "random") {
        b.count = static_cast<std::size_t>(c.get_int("count", 4));
        b.seed = static_cast<std::uint64_t>(c.get_int("seed", 1));
        b.smoothness = c.get_double("smoothness", 1.0);
    } else if (b.kind != "delta") {
        throw ConfigError("unknown bank kind '" + b.kind + "'");
    }
    b.scale = c.get_double("scale", 1.0);
    c.finish();
    return b;
}

inline ExtractorSpec read_extractor(ConfigCursor c) {
    ExtractorSpec e;
    e.depth = static_cast<std::size_t>(c.get_int("depth", 0));
    e.normalize = c.get_bool("normalize", true);
    for (ConfigCursor mc : c.blocks("module")) {
        ModuleSpec m;
        m.bank = read_bank(mc.block("bank"));
        m.nonlinearity = nonlin_from_string(mc.get_string("nonlinearity", "identity"));
        m.subsampling = static_cast<std::size_t>(mc.get_int("subsampling", 1));
        if (m.subsampling < 1) throw ConfigError("subsampling must be >= 1");
        mc.finish();
        e.modules.push_back(std::move(m));
    }
    if (e.modules.empty()) {
        ModuleSpec m;  // identity default
        e.modules.push_back(m);
    }
    c.finish();
    return e;
}

}  // namespace detail

inline ExperimentSpec parse_experiment(const ConfigNode& root) {
    ConfigCursor c(root, "");
    ExperimentSpec spec;
    spec.kind = experiment_from_string(c.get_string("experiment"));
    spec.outdir = c.get_string("out", "out");
    spec.seed = static_cast<std::uint64_t>(c.get_int("seed", 1));
    spec.parallel = c.get_bool("parallel", true);
    const std::string interp = c.get_string("interp", "linear");
    if (interp == "linear") spec.interp = Interp::linear;
    else if (interp == "cubic") spec.interp = Interp::cubic;
    else throw ConfigError("interp must be linear or cubic");

    {
        ConfigCursor g = c.block("grid");
        const int dim = static_cast<int>(g.get_int("dim"));
        const auto e0 = static_cast<std::size_t>(g.get_int("extent"));
        const auto e1 = static_cast<std::size_t>(g.get_int("extent1", static_cast<long>(e0)));
        const double spacing = g.get_double("spacing");
        g.finish();
        try {
            spec.grid = Grid(dim, {e0, dim == 2 ? e1 : 1}, spacing);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("grid: ") + e.what());
        }
    }

    {
        ConfigCursor s = c.block("signal");
        spec.signal.kind = s.get_string("kind");
        if (spec.signal.kind == "cartoon") {
            spec.signal.cartoon.f1 = s.has("f1") ? detail::read_smooth_part(s.block("f1"), spec.grid.dim)
                                                 : SmoothPart::zero();
            spec.signal.cartoon.f2 = s.has("f2") ? detail::read_smooth_part(s.block("f2"), spec.grid.dim)
                                                 : SmoothPart::zero();
            spec.signal.cartoon.domain = detail::read_domain(s.block("domain"), spec.grid.dim);
            spec.signal.cartoon.declared_size = s.get_double("size", 0.0);
        } else if (spec.signal.kind == "smooth") {
            spec.signal.smooth = detail::read_smooth_part(s.block("f"), spec.grid.dim);
        } else if (spec.signal.kind == "bandlimited") {
            spec.signal.bandwidth = s.get_double("bandwidth", 16.0);
            spec.signal.seed = static_cast<std::uint64_t>(s.get_int("seed", 3));
        } else if (spec.signal.kind == "pgm") {
            spec.signal.pgm_path = s.get_string("path");
        } else if (spec.signal.kind == "concentrated") {
            if (spec.grid.dim != 1) throw ConfigError("concentrated signals require dim = 1");
        } else {
            throw ConfigError("unknown signal kind '" + spec.signal.kind + "'");
        }
        s.finish();
    }

    if (c.has("extractor")) spec.extractor = detail::read_extractor(c.block("extractor"));
    if (spec.extractor.modules.empty()) spec.extractor.modules.push_back(ModuleSpec{});  // identity

    if (c.has("deformation")) {
        ConfigCursor d = c.block("deformation");
        spec.deformation.kind = d.get_string("kind", "translation");
        if (spec.deformation.kind != "translation" && spec.deformation.kind != "bump" &&
            spec.deformation.kind != "smoothrandom")
            throw ConfigError("unknown deformation kind '" + spec.deformation.kind + "'");
        spec.deformation.direction = detail::read_direction(d, "direction", spec.grid.dim);
        spec.deformation.ladder_start = d.get_double("ladder_start", 0.25);
        spec.deformation.ladder_count = static_cast<std::size_t>(d.get_int("ladder_count", 7));
        spec.deformation.ladder_ratio = d.get_double("ladder_ratio", 0.5);
        spec.deformation.seed = static_cast<std::uint64_t>(d.get_int("seed", 7));
        spec.deformation.max_wavenumber = static_cast<int>(d.get_int("max_wavenumber", 1));
        spec.deformation.period = d.get_double("period", 16.0);
        const std::string jn = d.get_string("jacobian_norm", "max-entry");
        if (jn == "max-entry") spec.deformation.jacobian_norm = JacobianNorm::max_entry;
        else if (jn == "frobenius") spec.deformation.jacobian_norm = JacobianNorm::frobenius;
        else throw ConfigError("jacobian_norm must be max-entry or frobenius");
        spec.deformation.counterexample = d.get_bool("counterexample", false);
        d.finish();
    }

    if (c.has("windows")) {
        ConfigCursor w = c.block("windows");
        if (w.has("alpha_min")) spec.windows.alpha_min = w.get_double("alpha_min");
        if (w.has("alpha_max")) spec.windows.alpha_max = w.get_double("alpha_max");
        if (w.has("prefactor_min")) spec.windows.prefactor_min = w.get_double("prefactor_min");
        if (w.has("prefactor_max")) spec.windows.prefactor_max = w.get_double("prefactor_max");
        spec.windows.rung_rel_tol = w.get_double("rung_rel_tol", spec.windows.rung_rel_tol);
        spec.windows.smooth_slack = w.get_double("smooth_slack", spec.windows.smooth_slack);
        spec.windows.growth_min = w.get_double("growth_min", spec.windows.growth_min);
        spec.windows.growth_max = w.get_double("growth_max", spec.windows.growth_max);
        w.finish();
    }

    if (c.has("bandlimited")) {
        ConfigCursor b = c.block("bandlimited");
        spec.bandlimited.mode = b.get_string("mode", "growth");
        if (spec.bandlimited.mode != "growth" && spec.bandlimited.mode != "rate")
            throw ConfigError("bandlimited mode must be growth or rate");
        if (b.has("bandwidths")) spec.bandlimited.bandwidths = b.get_doubles("bandwidths");
        spec.bandlimited.tau = b.get_double("tau", spec.bandlimited.tau);
        b.finish();
    }

    c.finish();

    // per-experiment default windows
    Windows& w = spec.windows;
    switch (spec.kind) {
        case ExperimentKind::sharpness:
            if (!w.alpha_min) w.alpha_min = 0.45;
            if (!w.alpha_max) w.alpha_max = 0.55;
            if (!w.prefactor_min) w.prefactor_min = std::sqrt(2.0) * 0.95;
            if (!w.prefactor_max) w.prefactor_max = std::sqrt(2.0) * 1.05;
            break;
        case ExperimentKind::concentrated:
            if (!w.alpha_min) w.alpha_min = -0.05;
            if (!w.alpha_max) w.alpha_max = 0.05;
            break;
        case ExperimentKind::cartoon:
            // lower bound only: features may decay faster than sqrt(s) once
            // the deformation scale drops below the filters' resolution
            if (!w.alpha_min) w.alpha_min = 0.45;
            break;
        case ExperimentKind::smooth:
            if (!w.alpha_min) w.alpha_min = 0.9;
            if (!w.alpha_max) w.alpha_max = 1.1;
            break;
        default:
            break;
    }
    return spec;
}

inline ExperimentSpec parse_experiment_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment(parse_config_text(ss.str()));
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace detail {

inline FilterBank build_bank(const BankSpec& spec, const Grid& grid, std::size_t layer) {
    FilterBank bank;
    if (spec.kind == "delta") {
        bank = make_delta_bank(grid);
    } else if (spec.kind == "wavelet") {
        bank = make_wavelet_bank(grid, spec.scales, spec.mother);
    } else if (spec.kind == "gabor") {
        std::vector<Coord> freqs;
        if (spec.frequencies.empty()) {
            const double base = 0.15 * M_PI / grid.spacing;
            freqs.push_back(Coord{0.0, 0.0});
            for (int m = 1; m <= 3; ++m) {
                freqs.push_back(Coord{base * m, 0.0});
                if (grid.dim == 2) freqs.push_back(Coord{0.0, base * m});
            }
        } else if (grid.dim == 1) {
            for (double f : spec.frequencies) freqs.push_back(Coord{f, 0.0});
        } else {
            if (spec.frequencies.size() % 2 != 0)
                throw ConfigError("gabor frequencies must come in pairs when dim = 2");
            for (std::size_t i = 0; i + 1 < spec.frequencies.size(); i += 2)
                freqs.push_back(Coord{spec.frequencies[i], spec.frequencies[i + 1]});
        }
        bank = make_gabor_bank(grid, freqs, spec.width);
    } else if (spec.kind == "random") {
        bank = make_random_bank(grid, spec.count, spec.seed + layer, spec.smoothness);
    } else {
        throw ConfigError("unknown bank kind '" + spec.kind + "'");
    }
    if (spec.scale != 1.0) {
        for (Atom& a : bank.atoms)
            for (cplx& v : a.filter.samples) v *= spec.scale;
        for (cplx& v : bank.output_atom.filter.samples) v *= spec.scale;
    }
    return bank;
}

}  // namespace detail

// Materialize the module chain on the input grid; needs depth+1 modules,
// replicating the last given module spec across remaining layers.
inline ModuleSequence build_extractor(const ExtractorSpec& spec, const Grid& input_grid) {
    if (spec.modules.empty()) throw std::invalid_argument("build_extractor: no module specs");
    ModuleSequence seq;
    seq.max_depth = spec.depth;
    Grid grid = input_grid;
    for (std::size_t n = 0; n <= spec.depth; ++n) {
        const ModuleSpec& ms = spec.modules[std::min(n, spec.modules.size() - 1)];
        Module m;
        m.bank = detail::build_bank(ms.bank, grid, n);
        m.nonlinearity = Nonlinearity{ms.nonlinearity};
        m.subsampling = ms.subsampling;
        if (spec.normalize) m.bank = normalize_bank(m.bank, m.nonlinearity.lipschitz()).bank;
        grid = m.output_grid();
        seq.modules.push_back(std::move(m));
    }
    seq.validate();
    return seq;
}

// Band-limited random signal: a seeded trigonometric polynomial over the DFT
// bins with |omega| in [bandwidth/2, bandwidth], unit L2 norm on the grid's
// periodic box. Exactly band-limited and analytically warpable.
struct BandLimitedSignal {
    struct Mode {
        Coord freq;
        cplx coeff;
    };
    std::vector<Mode> modes;

    cplx eval(const Coord& x) const {
        cplx acc(0.0, 0.0);
        for (const Mode& m : modes) {
            const double ph = m.freq[0] * x[0] + m.freq[1] * x[1];
            acc += m.coeff * cplx(std::cos(ph), std::sin(ph));
        }
        return acc;
    }
};

inline BandLimitedSignal make_bandlimited_signal(const Grid& grid, double bandwidth, std::uint64_t seed) {
    const double nyquist_guard = 0.5 * M_PI / grid.spacing;
    if (!(bandwidth > 0.0) || bandwidth > nyquist_guard)
        throw ConfigError("bandwidth " + std::to_string(bandwidth) + " outside (0, " +
                          std::to_string(nyquist_guard) + "] (grid Nyquist guard)");
    BandLimitedSignal sig;
    Rng rng(seed);
    for (std::size_t k0 = 0; k0 < grid.extent[0]; ++k0) {
        for (std::size_t k1 = 0; k1 < grid.extent[1]; ++k1) {
            Coord w{bin_frequency(grid, 0, k0), grid.dim == 2 ? bin_frequency(grid, 1, k1) : 0.0};
            const double r = grid.dim == 2 ? std::hypot(w[0], w[1]) : std::abs(w[0]);
            if (r < 0.5 * bandwidth || r > bandwidth) continue;
            const double re = rng.normal(), im = rng.normal();
            sig.modes.push_back(BandLimitedSignal::Mode{w, cplx(re, im)});
        }
    }
    if (sig.modes.empty())
        throw ConfigError("no DFT bins inside [bandwidth/2, bandwidth]; bandwidth too small for this grid");
    // normalize: ||f||^2 over the periodic box = volume * sum |c|^2
    double volume = 1.0;
    for (int a = 0; a < grid.dim; ++a)
        volume *= static_cast<double>(grid.extent[static_cast<std::size_t>(a)]) * grid.spacing;
    double s2 = 0.0;
    for (const auto& m : sig.modes) s2 += std::norm(m.coeff);
    const double scale = 1.0 / std::sqrt(volume * s2);
    for (auto& m : sig.modes) m.coeff *= scale;
    return sig;
}

// Rung-dependent concentrated indicator (unit norm, width ~ the rung's
// translation): supports sit strictly between cell centers so the translate
// by s shares no cells with the original.
inline Signal make_concentrated_indicator(const Grid& grid, double s) {
    // support [-s/2, s/2] nudged by half a cell so no cell center lands on a
    // support endpoint; the translate by s then shares no cells with the base
    const double lo = -0.5 * s + 0.49 * grid.spacing;
    const double hi = 0.5 * s + 0.49 * grid.spacing;
    Signal f = sample_function(grid, [&](const Coord& x) {
        return (x[0] >= lo && x[0] <= hi) ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
    });
    const double n = l2_norm(f);
    if (n == 0.0) throw std::invalid_argument("concentrated indicator: empty support (s below grid spacing)");
    for (cplx& v : f.samples) v /= n;
    return f;
}

inline DeformationField build_field(const DeformSpec& d, int dim, double amplitude) {
    if (d.kind == "translation") {
        double n = dim == 2 ? std::hypot(d.direction[0], d.direction[1]) : std::abs(d.direction[0]);
        if (!(n > 0.0)) throw ConfigError("deformation direction must be non-zero");
        return make_translation(dim, Coord{amplitude * d.direction[0] / n,
                                           dim == 2 ? amplitude * d.direction[1] / n : 0.0});
    }
    if (d.kind == "bump") return make_gaussian_bump(dim, amplitude, d.direction);
    return make_smooth_random_field(dim, amplitude, d.seed, d.max_wavenumber, d.period);
}

inline std::vector<double> amplitude_ladder(const DeformSpec& d) {
    std::vector<double> out;
    double s = d.ladder_start;
    for (std::size_t k = 0; k < d.ladder_count; ++k) {
        out.push_back(s);
        s *= d.ladder_ratio;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Runs and reports
// ---------------------------------------------------------------------------

struct Check {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct RunReport {
    std::vector<ResultRow> rows;
    ExponentFit fit;
    bool fit_valid = false;
    std::vector<Check> checks;
    std::string hypothesis_note;
    Curve input_curve;
    Curve feature_curve;

    bool all_pass() const {
        for (const Check& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline void add_check(RunReport& rep, const std::string& name, bool pass, const std::string& detail) {
    rep.checks.push_back(Check{name, pass, detail});
}

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct RungOutcome {
    double tau_sup = 0.0;
    double bandwidth = 0.0;
    double input_error = 0.0;
    double feature_error = 0.0;
};

// Evaluate rung jobs with at most hardware_concurrency in flight, keeping
// results (and all floating-point work) in deterministic per-rung order.
inline std::vector<RungOutcome> run_rungs(std::size_t n, const std::function<RungOutcome(std::size_t)>& job,
                                          bool parallel) {
    std::vector<RungOutcome> out(n);
    if (!parallel || n <= 1) {
        for (std::size_t k = 0; k < n; ++k) out[k] = job(k);
        return out;
    }
    const std::size_t wave = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    for (std::size_t base = 0; base < n; base += wave) {
        const std::size_t end = std::min(n, base + wave);
        std::vector<std::future<RungOutcome>> fut;
        for (std::size_t k = base; k < end; ++k)
            fut.push_back(std::async(std::launch::async, job, k));
        for (std::size_t k = base; k < end; ++k) out[k] = fut[k - base].get();
    }
    return out;
}

}  // namespace detail

// The per-rung machinery shared by every ladder experiment: build the rung's
// field, produce (base, deformed) signals, measure the input error and the
// feature-space error through the extractor.
class LadderRunner {
public:
    LadderRunner(const ExperimentSpec& spec) : spec_(spec), seq_(build_extractor(spec.extractor, spec.grid)) {}

    const ModuleSequence& sequence() const { return seq_; }

    AdmissibilityReport admissibility() const { return check_admissibility(seq_); }

    // Source evaluator for rung-independent analytic signals.
    std::function<cplx(const Coord&)> analytic_source() const {
        const SignalSpec& s = spec_.signal;
        if (s.kind == "cartoon") {
            CartoonSpec cs = s.cartoon;
            const int dim = spec_.grid.dim;
            return [cs, dim](const Coord& x) { return cplx(cs.value(x, dim), 0.0); };
        }
        if (s.kind == "smooth") {
            SmoothPart p = s.smooth;
            const int dim = spec_.grid.dim;
            return [p, dim](const Coord& x) { return cplx(p.value(x, dim), 0.0); };
        }
        if (s.kind == "bandlimited") {
            auto sig = std::make_shared<BandLimitedSignal>(
                make_bandlimited_signal(spec_.grid, s.bandwidth, s.seed));
            return [sig](const Coord& x) { return sig->eval(x); };
        }
        throw ConfigError("signal kind '" + s.kind + "' has no analytic form");
    }

    bool analytic() const { return spec_.signal.kind != "pgm" && spec_.signal.kind != "concentrated"; }

    // Ladder over deformation amplitudes for a fixed source.
    RunReport run_amplitude_ladder() const {
        RunReport rep;
        const std::vector<double> ladder = amplitude_ladder(spec_.deformation);
        if (!spec_.deformation.counterexample) {
            for (double s : ladder)
                if (!(s < 0.5))
                    throw ConfigError("amplitude ladder leaves ||tau||_inf < 1/2 (set counterexample = true)");
        }
        hypothesis_note(rep, ladder);

        const bool concentrated = spec_.signal.kind == "concentrated";
        Signal base_grid;
        std::function<cplx(const Coord&)> source;
        std::shared_ptr<const FeatureCollection> base_features;
        if (!concentrated) {
            if (analytic()) {
                source = analytic_source();
                if (spec_.signal.kind == "cartoon") {
                    validate_cartoon(spec_.signal.cartoon, spec_.grid);
                    base_grid = sample_cartoon(spec_.signal.cartoon, spec_.grid);
                } else {
                    base_grid = sample_function(spec_.grid, source);
                }
            } else {
                base_grid = read_pgm(spec_.signal.pgm_path);
                if (base_grid.grid != spec_.grid)
                    throw ConfigError("pgm grid does not match the configured grid");
            }
            base_features = std::make_shared<const FeatureCollection>(
                extract_features(seq_, base_grid, /*parallel=*/false));
        }

        auto job = [&](std::size_t k) {
            const double s = ladder[k];
            const DeformationField field = build_field(spec_.deformation, spec_.grid.dim, s);
            detail::RungOutcome o;
            o.tau_sup = sup_norm(field);
            Signal base = base_grid, deformed;
            if (concentrated) {
                base = make_concentrated_indicator(spec_.grid, s);
                deformed = apply_deformation(base, field, spec_.interp, spec_.deformation.counterexample);
            } else if (analytic()) {
                deformed = warped_samples(spec_.grid, source, field);
            } else {
                deformed = apply_deformation(base, field, spec_.interp, spec_.deformation.counterexample);
            }
            o.input_error = l2_distance(base, deformed);
            const FeatureCollection def_features = extract_features(seq_, deformed, /*parallel=*/false);
            if (concentrated) {
                const FeatureCollection bf = extract_features(seq_, base, /*parallel=*/false);
                o.feature_error = feature_distance(bf, def_features);
            } else {
                o.feature_error = feature_distance(*base_features, def_features);
            }
            return o;
        };
        const std::vector<detail::RungOutcome> out = detail::run_rungs(ladder.size(), job, spec_.parallel);
        for (std::size_t k = 0; k < out.size(); ++k) {
            rep.rows.push_back(ResultRow{k, out[k].tau_sup, 0.0, out[k].input_error, out[k].feature_error});
            rep.input_curve.push_back(CurvePoint{out[k].tau_sup, out[k].input_error});
            rep.feature_curve.push_back(CurvePoint{out[k].tau_sup, out[k].feature_error});
        }
        return rep;
    }

    // Ladder over bandwidths with one fixed deformation.
    RunReport run_bandwidth_ladder() const {
        RunReport rep;
        const double s = spec_.bandlimited.tau;
        if (!(s < 0.5)) throw ConfigError("bandlimited tau must satisfy ||tau||_inf < 1/2");
        const DeformationField field = build_field(spec_.deformation, spec_.grid.dim, s);
        rep.hypothesis_note = "||tau||_inf < 1/2: yes";
        auto job = [&](std::size_t k) {
            const double R = spec_.bandlimited.bandwidths[k];
            const BandLimitedSignal sig = make_bandlimited_signal(spec_.grid, R, spec_.signal.seed);
            auto src = [&sig](const Coord& x) { return sig.eval(x); };
            const Signal base = sample_function(spec_.grid, src);
            const Signal deformed = warped_samples(spec_.grid, src, field);
            detail::RungOutcome o;
            o.tau_sup = sup_norm(field);
            o.bandwidth = R;
            o.input_error = l2_distance(base, deformed);
            o.feature_error = feature_distance(extract_features(seq_, base, false),
                                               extract_features(seq_, deformed, false));
            return o;
        };
        const std::vector<detail::RungOutcome> out =
            detail::run_rungs(spec_.bandlimited.bandwidths.size(), job, spec_.parallel);
        for (std::size_t k = 0; k < out.size(); ++k) {
            rep.rows.push_back(
                ResultRow{k, out[k].tau_sup, out[k].bandwidth, out[k].input_error, out[k].feature_error});
            rep.input_curve.push_back(CurvePoint{out[k].bandwidth, out[k].input_error});
            rep.feature_curve.push_back(CurvePoint{out[k].bandwidth, out[k].feature_error});
        }
        return rep;
    }

private:
    void hypothesis_note(RunReport& rep, const std::vector<double>& ladder) const {
        const double smax = *std::max_element(ladder.begin(), ladder.end());
        const DeformationField top = build_field(spec_.deformation, spec_.grid.dim, smax);
        const double jac = jacobian_sup(top, spec_.deformation.jacobian_norm);
        const double jac_limit = 1.0 / (2.0 * spec_.grid.dim);
        std::string note = "hypotheses: ||tau||_inf < 1/2: ";
        note += smax < 0.5 ? "yes" : "NO";
        note += "; tau in C1 with ||Dtau||_inf <= 1/(2d): ";
        note += jac <= jac_limit ? "yes" : "NO";
        note += " (||Dtau||_inf = " + detail::fmt(jac) + ", limit " + detail::fmt(jac_limit) + ")";
        rep.hypothesis_note = note;
    }

    const ExperimentSpec& spec_;
    ModuleSequence seq_;
};

// ---------------------------------------------------------------------------
// Experiment-level assertions
// ---------------------------------------------------------------------------

namespace detail {

inline void assert_decoupling(RunReport& rep, double tol) {
    bool ok = true;
    std::string msg;
    for (const ResultRow& r : rep.rows) {
        if (r.feature_error > r.input_error * (1.0 + tol)) {
            ok = false;
            msg = "rung " + std::to_string(r.rung) + ": feature " + fmt(r.feature_error) + " > input " +
                  fmt(r.input_error);
            break;
        }
    }
    add_check(rep, "contractivity: feature error <= input error", ok, msg);
}

inline void assert_alpha_window(RunReport& rep, const Windows& w) {
    if (!w.alpha_min && !w.alpha_max) return;
    const double lo = w.alpha_min.value_or(-1e9), hi = w.alpha_max.value_or(1e9);
    const bool ok = rep.fit_valid && rep.fit.alpha >= lo && rep.fit.alpha <= hi;
    std::string name;
    if (w.alpha_min && w.alpha_max) name = "fitted alpha in [" + fmt(lo) + ", " + fmt(hi) + "]";
    else if (w.alpha_min) name = "fitted alpha >= " + fmt(lo);
    else name = "fitted alpha <= " + fmt(hi);
    add_check(rep, name, ok, "alpha = " + fmt(rep.fit.alpha));
}

inline void assert_prefactor_window(RunReport& rep, const Windows& w) {
    if (!w.prefactor_min && !w.prefactor_max) return;
    const double lo = w.prefactor_min.value_or(0.0), hi = w.prefactor_max.value_or(1e9);
    const double p = rep.fit.prefactor();
    const bool ok = rep.fit_valid && p >= lo && p <= hi;
    add_check(rep, "fitted prefactor in [" + fmt(lo) + ", " + fmt(hi) + "]", ok, "prefactor = " + fmt(p));
}

}  // namespace detail

// measured sup of |grad f| <x>^d for the smooth experiment's signal
inline double smooth_decay_constant(const ExperimentSpec& spec) {
    double decay = 0.0;
    detail::dense_coords(spec.grid, [&](const Coord& x) {
        const double w = std::pow(japanese_bracket(x, spec.grid.dim), spec.grid.dim);
        decay = std::max(decay, detail::gradient_norm(spec.signal.smooth, x, spec.grid.dim) * w);
    });
    return decay;
}

// Execute the configured experiment; assertions are recorded, not thrown.
inline RunReport run_experiment(const ExperimentSpec& spec) {
    LadderRunner runner(spec);
    RunReport rep;

    const AdmissibilityReport adm = runner.admissibility();
    const bool needs_admissible = spec.kind == ExperimentKind::cartoon ||
                                  spec.kind == ExperimentKind::smooth ||
                                  spec.kind == ExperimentKind::bandlimited || !spec.extractor.is_identity();
    if (needs_admissible) {
        detail::add_check(rep, "weak admissibility of the module sequence", adm.admissible,
                          adm.admissible ? ""
                                         : "layer " + std::to_string(adm.violating_layer) +
                                               ": bessel*max(1,L^2) = " + detail::fmt(adm.value) + " > 1");
        if (!adm.admissible) return rep;
    }

    // class guard: the smooth experiment is only defined for smooth signals
    if (spec.kind == ExperimentKind::smooth && spec.signal.kind != "smooth")
        throw ConfigError("the smooth experiment requires signal kind 'smooth' "
                          "(discontinuous inputs fail the gradient decay condition)");
    if (spec.kind == ExperimentKind::concentrated && spec.signal.kind != "concentrated")
        throw ConfigError("the concentrated-family experiment requires signal kind 'concentrated'");
    if (spec.kind == ExperimentKind::cartoon && spec.signal.kind != "cartoon")
        throw ConfigError("the cartoon experiment requires signal kind 'cartoon'");
    if (spec.kind == ExperimentKind::bandlimited && spec.signal.kind != "bandlimited")
        throw ConfigError("the bandlimited experiment requires signal kind 'bandlimited'");

    if (spec.kind == ExperimentKind::bandlimited && spec.bandlimited.mode == "growth") {
        RunReport ladder = runner.run_bandwidth_ladder();
        rep.rows = std::move(ladder.rows);
        rep.input_curve = std::move(ladder.input_curve);
        rep.feature_curve = std::move(ladder.feature_curve);
        rep.hypothesis_note = std::move(ladder.hypothesis_note);
        rep.fit = fit_decay_exponent(rep.feature_curve);  // growth exponent vs bandwidth
        rep.fit_valid = true;
        detail::assert_decoupling(rep, spec.windows.decoupling_tol);
        bool ok = true;
        std::string msg;
        for (std::size_t k = 0; k + 1 < rep.rows.size(); ++k) {
            const double br = rep.rows[k + 1].bandwidth / rep.rows[k].bandwidth;
            if (std::abs(br - 2.0) > 1e-9) continue;  // growth factors only defined across doublings
            const double g = rep.rows[k + 1].feature_error / rep.rows[k].feature_error;
            if (g < spec.windows.growth_min || g > spec.windows.growth_max) {
                ok = false;
                msg = "R " + detail::fmt(rep.rows[k].bandwidth) + " -> " + detail::fmt(rep.rows[k + 1].bandwidth) +
                      ": factor " + detail::fmt(g);
                break;
            }
        }
        detail::add_check(rep, "per-doubling error growth in [" + detail::fmt(spec.windows.growth_min) + ", " +
                                   detail::fmt(spec.windows.growth_max) + "]",
                          ok, msg);
        return rep;
    }

    RunReport ladder = runner.run_amplitude_ladder();
    rep.rows = std::move(ladder.rows);
    rep.input_curve = std::move(ladder.input_curve);
    rep.feature_curve = std::move(ladder.feature_curve);
    rep.hypothesis_note = std::move(ladder.hypothesis_note);

    // fit the curve the experiment's law speaks about
    const bool fit_features = spec.kind == ExperimentKind::cartoon || spec.kind == ExperimentKind::smooth ||
                              (spec.kind == ExperimentKind::bandlimited && spec.bandlimited.mode == "rate");
    const Curve& fitted = fit_features ? rep.feature_curve : rep.input_curve;
    bool fit_ok = true;
    for (const CurvePoint& p : fitted)
        if (!(p.error > 0.0)) fit_ok = false;
    if (fit_ok && fitted.size() >= 4) {
        rep.fit = fit_decay_exponent(fitted);
        rep.fit_valid = true;
    }

    detail::assert_decoupling(rep, spec.windows.decoupling_tol);

    switch (spec.kind) {
        case ExperimentKind::sharpness: {
            // every rung within tolerance of sqrt(2 s)
            bool ok = true;
            std::string msg;
            for (const ResultRow& r : rep.rows) {
                const double want = std::sqrt(2.0 * r.tau_sup);
                if (std::abs(r.input_error - want) > spec.windows.rung_rel_tol * want) {
                    ok = false;
                    msg = "rung " + std::to_string(r.rung) + ": " + detail::fmt(r.input_error) + " vs sqrt(2s) = " +
                          detail::fmt(want);
                    break;
                }
            }
            detail::add_check(rep, "every rung within " + detail::fmt(100 * spec.windows.rung_rel_tol) +
                                       "% of sqrt(2 s)",
                              ok, msg);
            detail::assert_alpha_window(rep, spec.windows);
            detail::assert_prefactor_window(rep, spec.windows);
            break;
        }
        case ExperimentKind::concentrated: {
            bool ok = true;
            std::string msg;
            for (const ResultRow& r : rep.rows) {
                if (std::abs(r.input_error - std::sqrt(2.0)) > spec.windows.rung_rel_tol * std::sqrt(2.0)) {
                    ok = false;
                    msg = "rung " + std::to_string(r.rung) + ": " + detail::fmt(r.input_error);
                    break;
                }
            }
            detail::add_check(rep, "every rung within " + detail::fmt(100 * spec.windows.rung_rel_tol) +
                                       "% of sqrt(2)",
                              ok, msg);
            detail::assert_alpha_window(rep, spec.windows);
            break;
        }
        case ExperimentKind::cartoon: {
            // Assemble the stability constant from measured components:
            // C_K = 2 max{2 K D, K C_dB^{1/2}} with C_dB the fitted tube slope.
            const double K = spec.signal.cartoon.declared_size > 0.0
                                 ? spec.signal.cartoon.declared_size
                                 : estimate_size(spec.signal.cartoon, spec.grid);
            const double D = smooth_class_constant(spec.grid.dim);
            Curve tube;
            for (const ResultRow& r : rep.rows) {
                const DeformationField f = build_field(spec.deformation, spec.grid.dim, r.tau_sup);
                tube.push_back(
                    CurvePoint{r.tau_sup, tube_volume(spec.signal.cartoon.domain, f, spec.grid)});
            }
            const double C_dB = fit_through_origin(tube);
            const double C_K = 2.0 * std::max(2.0 * K * D, K * std::sqrt(C_dB));
            bool ok = true;
            std::string msg;
            for (const ResultRow& r : rep.rows) {
                const double bound = C_K * std::sqrt(r.tau_sup);
                if (r.feature_error > bound) {
                    ok = false;
                    msg = "rung " + std::to_string(r.rung) + ": " + detail::fmt(r.feature_error) + " > " +
                          detail::fmt(bound);
                    break;
                }
            }
            detail::add_check(rep, "every feature rung <= C_K sqrt(s) (K = " + detail::fmt(K) + ", D = " +
                                       detail::fmt(D) + ", C_dB = " + detail::fmt(C_dB) + ", C_K = " +
                                       detail::fmt(C_K) + ")",
                              ok, msg);
            detail::assert_alpha_window(rep, spec.windows);
            break;
        }
        case ExperimentKind::smooth: {
            // linear law with the measured decay constant of the signal
            const double C = smooth_decay_constant(spec);
            const double D = smooth_class_constant(spec.grid.dim);
            bool ok = true;
            std::string msg;
            for (const ResultRow& r : rep.rows) {
                const double bound = C * D * r.tau_sup * spec.windows.smooth_slack;
                if (r.feature_error > bound || r.input_error > bound) {
                    ok = false;
                    msg = "rung " + std::to_string(r.rung) + ": input " + detail::fmt(r.input_error) +
                          ", feature " + detail::fmt(r.feature_error) + " vs bound " + detail::fmt(bound);
                    break;
                }
            }
            detail::add_check(rep, "every rung <= C D s * " + detail::fmt(spec.windows.smooth_slack) +
                                       " (C = " + detail::fmt(C) + ", D = " + detail::fmt(D) + ")",
                              ok, msg);
            detail::assert_alpha_window(rep, spec.windows);
            break;
        }
        case ExperimentKind::bandlimited: {  // rate mode
            detail::assert_alpha_window(rep, spec.windows);
            break;
        }
        case ExperimentKind::deform: {
            detail::assert_alpha_window(rep, spec.windows);
            detail::assert_prefactor_window(rep, spec.windows);
            break;
        }
        default:
            break;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Output emission and the CLI-facing entry point
// ---------------------------------------------------------------------------

// Write every atom of a bank in the raw signal format.
inline void export_bank(const FilterBank& bank, const std::string& outdir) {
    namespace fs = std::filesystem;
    fs::create_directories(outdir);
    write_signal(bank.output_atom.filter, (fs::path(outdir) / ("atom_" + bank.output_atom.label + ".scs")).string());
    for (const Atom& a : bank.atoms)
        write_signal(a.filter, (fs::path(outdir) / ("atom_" + a.label + ".scs")).string());
}

inline void write_run_outputs(const ExperimentSpec& spec, const RunReport& rep) {
    namespace fs = std::filesystem;
    fs::create_directories(spec.outdir);
    write_text_file((fs::path(spec.outdir) / "results.csv").string(), results_csv(rep.rows, rep.fit));
    // visual-inspection render of 2-d cartoon inputs
    if (spec.grid.dim == 2 && spec.signal.kind == "cartoon") {
        try {
            write_pgm(sample_cartoon(spec.signal.cartoon, spec.grid),
                      (fs::path(spec.outdir) / "signal.pgm").string());
        } catch (const std::invalid_argument&) {
            // unresolvable render (domain outside the safe region); curves stand on their own
        }
    }
    std::vector<PlotSeries> series;
    series.push_back(PlotSeries{"input error", "#1f77b4", rep.input_curve});
    if (!spec.extractor.is_identity())
        series.push_back(PlotSeries{"feature error", "#d62728", rep.feature_curve});
    const bool growth = spec.kind == ExperimentKind::bandlimited && spec.bandlimited.mode == "growth";
    write_text_file((fs::path(spec.outdir) / "plot.svg").string(),
                    loglog_svg(growth ? "error vs bandwidth" : "deformation error vs ||tau||_inf", series,
                               rep.fit_valid ? &rep.fit : nullptr, growth ? "bandwidth" : "||tau||_inf"));
}

// Returns the process exit code: 0 all assertions pass, 1 an assertion
// failed, 2 configuration errors (including file/parse problems).
inline int run_from_file(const std::string& config_path, std::ostream& out,
                         const std::function<void(ExperimentSpec&)>& override_spec = {}) {
    ExperimentSpec spec;
    try {
        spec = parse_experiment_file(config_path);
        if (override_spec) override_spec(spec);
    } catch (const ConfigError& e) {
        out << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        out << "config error: " << e.what() << "\n";
        return 2;
    }
    RunReport rep;
    try {
        rep = run_experiment(spec);
    } catch (const ConfigError& e) {
        out << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        // configured values violating an operation's precondition
        out << "config error: " << e.what() << "\n";
        return 2;
    }
    write_run_outputs(spec, rep);
    if (!rep.hypothesis_note.empty()) out << rep.hypothesis_note << "\n";
    if (rep.fit_valid)
        out << "fit: alpha = " << detail::fmt(rep.fit.alpha) << ", prefactor = " << detail::fmt(rep.fit.prefactor())
            << ", residual = " << detail::fmt(rep.fit.residual) << "\n";
    for (const Check& c : rep.checks) {
        out << (c.pass ? "[pass] " : "[FAIL] ") << c.name;
        if (!c.detail.empty()) out << " — " << c.detail;
        out << "\n";
    }
    out << "results: " << spec.outdir << "/results.csv, " << spec.outdir << "/plot.svg\n";
    return rep.all_pass() ? 0 : 1;
}

// Feature export: CSV of (layer, path, l2_norm), optional per-feature blobs.
inline void export_features(const ModuleSequence& seq, const FeatureCollection& fc,
                            const std::string& outdir, bool save_blobs) {
    namespace fs = std::filesystem;
    fs::create_directories(outdir);
    std::string csv = "layer,path,l2_norm\n";
    for (std::size_t n = 0; n < fc.layers.size(); ++n) {
        for (const Feature& f : fc.layers[n]) {
            const std::string path = f.path.to_string(seq);
            csv += std::to_string(n) + "," + path + "," + format_double(l2_norm(f.output)) + "\n";
            if (save_blobs) {
                std::string stem = path;
                for (char& ch : stem)
                    if (ch == '.') ch = '_';
                const std::string name = "feature_" + std::to_string(n) + "_" + stem + ".scs";
                write_signal(f.output, (fs::path(outdir) / name).string());
            }
        }
    }
    write_text_file((fs::path(outdir) / "features.csv").string(), csv);
}

}  // namespace scatstab
