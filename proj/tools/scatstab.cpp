// Command-line front end: experiment runs, feature extraction, frame-bound
// inspection. Exit codes: 0 success, 1 a run assertion failed, 2 bad
// configuration or input files.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "scatstab/scatstab.hpp"

namespace {

using namespace scatstab;

struct CommonOpts {
    std::string config;
    std::string out;
    long seed = -1;
    int grid_refine = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required) {
    auto* copt = cmd->add_option("--config", o.config, "experiment config file");
    if (config_required) copt->required();
    cmd->add_option("--out", o.out, "output directory (overrides the config's 'out')");
    cmd->add_option("--seed", o.seed, "seed override");
    cmd->add_option("--grid-refine", o.grid_refine, "halve the grid spacing this many times")
        ->check(CLI::Range(0, 6));
}

void apply_overrides(const CommonOpts& o, ExperimentSpec& spec) {
    if (!o.out.empty()) spec.outdir = o.out;
    if (o.seed >= 0) {
        spec.seed = static_cast<std::uint64_t>(o.seed);
        spec.signal.seed = static_cast<std::uint64_t>(o.seed);
        spec.deformation.seed = static_cast<std::uint64_t>(o.seed);
    }
    for (int r = 0; r < o.grid_refine; ++r) {
        std::array<std::size_t, 2> ext = spec.grid.extent;
        ext[0] *= 2;
        if (spec.grid.dim == 2) ext[1] *= 2;
        spec.grid = Grid(spec.grid.dim, ext, spec.grid.spacing * 0.5);
    }
}

int run_with_config(const std::string& path, const CommonOpts& o) {
    return run_from_file(path, std::cout, [&o](ExperimentSpec& spec) { apply_overrides(o, spec); });
}

// Built-in default configs for the dedicated subcommands.
const char* kSharpnessConfig = R"(
experiment = sharpness
out = out/sharpness
grid {
  dim = 1
  extent = 8192
  spacing = 0.0009765625
}
signal {
  kind = cartoon
  f2 {
    kind = constant
    value = 1
  }
  domain {
    kind = interval
    lo = -1
    hi = 1
  }
}
deformation {
  kind = translation
  ladder_start = 0.25
  ladder_count = 7
}
)";

const char* kSmoothConfig = R"(
experiment = smooth
out = out/smooth
grid {
  dim = 1
  extent = 4096
  spacing = 0.001953125
}
signal {
  kind = smooth
  f {
    kind = mixture
    component {
      amplitude = 1.0
      sigma = 0.5
      center = -0.8
    }
    component {
      amplitude = 0.6
      sigma = 0.3
      center = 0.9
    }
  }
}
extractor {
  depth = 2
  module {
    bank {
      kind = wavelet
      scales = 3
      mother = morlet
    }
    nonlinearity = modulus
  }
}
deformation {
  kind = translation
  ladder_start = 0.2
  ladder_count = 6
}
)";

const char* kBandlimitedConfig = R"(
experiment = bandlimited
out = out/bandlimited
grid {
  dim = 1
  extent = 8192
  spacing = 0.0009765625
}
signal {
  kind = bandlimited
  bandwidth = 16
  seed = 3
}
extractor {
  depth = 1
  module {
    bank {
      kind = wavelet
      scales = 3
      mother = morlet
    }
    nonlinearity = modulus
  }
}
bandlimited {
  mode = growth
  bandwidths = 4 8 16 32 64
  tau = 0.005
}
)";

const char* kDeformConfig = R"(
experiment = deform
out = out/deform
grid {
  dim = 1
  extent = 8192
  spacing = 0.0009765625
}
signal {
  kind = smooth
  f {
    kind = gaussian
    amplitude = 1.0
    sigma = 0.7
  }
}
deformation {
  kind = translation
  ladder_start = 0.25
  ladder_count = 7
}
)";

int run_builtin(const char* text, const CommonOpts& o) {
    if (!o.config.empty()) return run_with_config(o.config, o);
    try {
        ExperimentSpec spec = parse_experiment(parse_config_text(text));
        apply_overrides(o, spec);
        RunReport rep = run_experiment(spec);
        write_run_outputs(spec, rep);
        if (!rep.hypothesis_note.empty()) std::cout << rep.hypothesis_note << "\n";
        for (const Check& c : rep.checks)
            std::cout << (c.pass ? "[pass] " : "[FAIL] ") << c.name << (c.detail.empty() ? "" : " — " + c.detail)
                      << "\n";
        std::cout << "results: " << spec.outdir << "/results.csv\n";
        return rep.all_pass() ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cout << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cout << "config error: " << e.what() << "\n";
        return 2;
    }
}

int do_extract(const CommonOpts& o, const std::string& input, bool save_blobs) {
    try {
        ExperimentSpec spec = parse_experiment_file(o.config);
        CommonOpts o2 = o;
        o2.grid_refine = 0;  // grid comes from the input file
        apply_overrides(o2, spec);
        Signal f;
        const std::string ext = std::filesystem::path(input).extension().string();
        if (ext == ".pgm") f = read_pgm(input);
        else f = read_signal(input);
        const ModuleSequence seq = build_extractor(spec.extractor, f.grid);
        const FeatureCollection fc = extract_features(seq, f, /*parallel=*/true);
        export_features(seq, fc, spec.outdir, save_blobs);
        std::cout << "extracted " << fc.total_features() << " features -> " << spec.outdir
                  << "/features.csv\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cout << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cout << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cout << "config error: " << e.what() << "\n";
        return 2;
    }
}

int do_bessel(const CommonOpts& o) {
    try {
        ExperimentSpec spec = parse_experiment_file(o.config);
        apply_overrides(o, spec);
        Grid grid = spec.grid;
        bool admissible = true;
        for (std::size_t n = 0; n <= spec.extractor.depth; ++n) {
            const ModuleSpec& ms = spec.extractor.modules[std::min(n, spec.extractor.modules.size() - 1)];
            Module m;
            m.bank = detail::build_bank(ms.bank, grid, n);
            m.nonlinearity = Nonlinearity{ms.nonlinearity};
            m.subsampling = ms.subsampling;
            const double L = m.nonlinearity.lipschitz();
            const double before = bessel_bound(m.bank);
            double after = before;
            if (spec.extractor.normalize) {
                NormalizedBank nb = normalize_bank(m.bank, L);
                after = nb.bessel_after;
                m.bank = std::move(nb.bank);
            }
            const double crit = after * std::max(1.0, L * L);
            admissible = admissible && crit <= 1.0 + 1e-9;
            std::cout << "layer " << n << ": atoms = " << m.bank.total_atoms() << ", bessel = "
                      << format_double(before) << (spec.extractor.normalize ? " -> " + format_double(after) : "")
                      << ", L = " << L << ", bessel*max(1,L^2) = " << format_double(crit) << "\n";
            if (!o.out.empty()) export_bank(m.bank, o.out + "/layer_" + std::to_string(n));
            grid = m.output_grid();
        }
        std::cout << (admissible ? "weak admissibility: satisfied" : "weak admissibility: VIOLATED") << "\n";
        return admissible ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cout << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cout << "config error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deformation-stability experiments for convolutional feature extractors"};
    app.require_subcommand(1);

    CommonOpts run_o, extract_o, bessel_o, deform_o, sharp_o, smooth_o, band_o;
    std::string extract_input;
    bool extract_blobs = false;

    auto* run_cmd = app.add_subcommand("run", "run the experiment named in a config file");
    add_common(run_cmd, run_o, /*config_required=*/true);

    auto* extract_cmd = app.add_subcommand("extract", "extract features from a signal file");
    add_common(extract_cmd, extract_o, true);
    extract_cmd->add_option("--input", extract_input, ".scs or .pgm input")->required();
    extract_cmd->add_flag("--save-signals", extract_blobs, "also write each feature as a .scs blob");

    auto* bessel_cmd = app.add_subcommand("bessel", "report frame bounds and admissibility of a config's extractor");
    add_common(bessel_cmd, bessel_o, true);

    auto* deform_cmd = app.add_subcommand("deform", "deformation error curve (no assertions by default)");
    add_common(deform_cmd, deform_o, false);

    auto* sharp_cmd = app.add_subcommand("sharpness", "indicator-translation sharpness experiment");
    add_common(sharp_cmd, sharp_o, false);

    auto* smooth_cmd = app.add_subcommand("smooth", "smooth-class decay-rate experiment");
    add_common(smooth_cmd, smooth_o, false);

    auto* band_cmd = app.add_subcommand("bandlimited", "bandwidth-growth comparison experiment");
    add_common(band_cmd, band_o, false);

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) return run_with_config(run_o.config, run_o);
    if (extract_cmd->parsed()) return do_extract(extract_o, extract_input, extract_blobs);
    if (bessel_cmd->parsed()) return do_bessel(bessel_o);
    if (deform_cmd->parsed()) return run_builtin(kDeformConfig, deform_o);
    if (sharp_cmd->parsed()) return run_builtin(kSharpnessConfig, sharp_o);
    if (smooth_cmd->parsed()) return run_builtin(kSmoothConfig, smooth_o);
    if (band_cmd->parsed()) return run_builtin(kBandlimitedConfig, band_o);
    return 2;
}
