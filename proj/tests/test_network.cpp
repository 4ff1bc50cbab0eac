#include <catch2/catch_amalgamated.hpp>

#include "scatstab/network.hpp"

#include "oracles.hpp"

using namespace scatstab;

namespace {

Module identity_module(const Grid& g) {
    return Module{make_delta_bank(g), Nonlinearity{NonlinKind::identity}, 1};
}

ModuleSequence identity_sequence(const Grid& g) {
    ModuleSequence seq;
    seq.modules.push_back(identity_module(g));
    seq.max_depth = 0;
    return seq;
}

// depth-deep sequence sharing one normalized bank per layer (R = 1)
ModuleSequence wavelet_sequence(const Grid& g, std::size_t depth, NonlinKind nl,
                                std::size_t scales = 3) {
    ModuleSequence seq;
    seq.max_depth = depth;
    for (std::size_t n = 0; n <= depth; ++n) {
        Module m;
        m.nonlinearity = Nonlinearity{nl};
        m.bank = normalize_bank(make_wavelet_bank(g, scales), m.nonlinearity.lipschitz()).bank;
        m.subsampling = 1;
        seq.modules.push_back(std::move(m));
    }
    return seq;
}

}  // namespace

TEST_CASE("non-linearities map zero to zero and honor their Lipschitz constants") {
    Rng rng(17);
    for (NonlinKind kind : {NonlinKind::modulus, NonlinKind::relu, NonlinKind::tanh, NonlinKind::sigmoid,
                            NonlinKind::identity}) {
        const Nonlinearity m{kind};
        REQUIRE(m.apply(cplx(0.0, 0.0)) == cplx(0.0, 0.0));
        const double L = m.lipschitz();
        double worst = 0.0;
        for (int i = 0; i < 100000; ++i) {
            const cplx a(rng.uniform(-10, 10), rng.uniform(-10, 10));
            const cplx b(rng.uniform(-10, 10), rng.uniform(-10, 10));
            const double num = std::abs(m.apply(a) - m.apply(b));
            const double den = std::abs(a - b);
            if (den > 0) worst = std::max(worst, num / den);
        }
        INFO(m.name());
        REQUIRE(worst <= L * (1.0 + 1e-12));
    }
}

TEST_CASE("propagate_one") {
    Grid g = Grid::line(64, 0.25);
    SECTION("zero in, zero out") {
        Module m{normalize_bank(make_wavelet_bank(g, 2), 1.0).bank, Nonlinearity{NonlinKind::modulus}, 2};
        const Signal out = propagate_one(m, Signal(g), 0);
        REQUIRE(l2_norm(out) == 0.0);
    }
    SECTION("identity chain leaves the signal untouched") {
        FilterBank bank = make_delta_bank(g);
        bank.atoms.push_back(Atom{"d2", delta_signal(g)});
        Module m{bank, Nonlinearity{NonlinKind::identity}, 1};
        const Signal f = oracles::random_signal(g, 3);
        REQUIRE(propagate_one(m, f, 0).samples == f.samples);
    }
    SECTION("modulus of a negative real signal") {
        FilterBank bank = make_delta_bank(g);
        bank.atoms.push_back(Atom{"d2", delta_signal(g)});
        Module m{bank, Nonlinearity{NonlinKind::modulus}, 1};
        Signal f(g);
        for (std::size_t i = 0; i < f.samples.size(); ++i) f.samples[i] = cplx(-double(i % 7), 0.0);
        const Signal out = propagate_one(m, f, 0);
        for (std::size_t i = 0; i < f.samples.size(); ++i)
            REQUIRE(out.samples[i] == cplx(double(i % 7), 0.0));
    }
    SECTION("unknown atom index is rejected") {
        Module m = identity_module(g);
        REQUIRE_THROWS_AS(propagate_one(m, Signal(g), 0), std::invalid_argument);
    }
}

TEST_CASE("extract_features") {
    Grid g = Grid::line(128, 0.25);
    SECTION("identity configuration returns the signal itself") {
        const Signal f = oracles::random_signal(g, 5);
        const FeatureCollection fc = extract_features(identity_sequence(g), f);
        REQUIRE(fc.total_features() == 1);
        REQUIRE(fc.layers[0][0].output.samples == f.samples);  // bit-exact
    }
    SECTION("zero input gives identically zero features") {
        const ModuleSequence seq = wavelet_sequence(g, 2, NonlinKind::modulus);
        const FeatureCollection fc = extract_features(seq, Signal(g));
        for (const auto& layer : fc.layers)
            for (const Feature& f : layer) REQUIRE(l2_norm(f.output) == 0.0);
    }
    SECTION("path counting, depth 1 with two propagation atoms") {
        const ModuleSequence seq = wavelet_sequence(g, 1, NonlinKind::modulus, 2);
        const FeatureCollection fc = extract_features(seq, oracles::random_signal(g, 6));
        REQUIRE(fc.layers[0].size() == 1);
        REQUIRE(fc.layers[1].size() == 2);
        REQUIRE(fc.total_features() == 3);
    }
    SECTION("path counting, depth 2: 1 + J + J^2 features") {
        const ModuleSequence seq = wavelet_sequence(g, 2, NonlinKind::modulus, 3);
        const FeatureCollection fc = extract_features(seq, oracles::random_signal(g, 7));
        REQUIRE(fc.total_features() == 1 + 3 + 9);
    }
    SECTION("path counting with unequal banks per layer") {
        ModuleSequence seq;
        seq.max_depth = 2;
        for (std::size_t scales : {2, 3, 1}) {
            Nonlinearity nl{NonlinKind::modulus};
            seq.modules.push_back(
                Module{normalize_bank(make_wavelet_bank(g, scales), nl.lipschitz()).bank, nl, 1});
        }
        const FeatureCollection fc = extract_features(seq, oracles::random_signal(g, 8));
        REQUIRE(fc.layers[1].size() == 2);
        REQUIRE(fc.layers[2].size() == 2 * 3);
        REQUIRE(fc.total_features() == 1 + 2 + 6);
    }
    SECTION("parallel and serial evaluation agree bit for bit") {
        const ModuleSequence seq = wavelet_sequence(g, 2, NonlinKind::modulus, 3);
        const Signal f = oracles::random_signal(g, 8);
        const FeatureCollection a = extract_features(seq, f, /*parallel=*/true);
        const FeatureCollection b = extract_features(seq, f, /*parallel=*/false);
        REQUIRE(a.total_features() == b.total_features());
        for (std::size_t n = 0; n < a.layers.size(); ++n)
            for (std::size_t i = 0; i < a.layers[n].size(); ++i)
                REQUIRE(a.layers[n][i].output.samples == b.layers[n][i].output.samples);
    }
    SECTION("grid mismatch is rejected") {
        const ModuleSequence seq = identity_sequence(g);
        REQUIRE_THROWS_AS(extract_features(seq, Signal(Grid::line(64, 0.25))), std::invalid_argument);
    }
}

TEST_CASE("feature_distance") {
    Grid g = Grid::line(128, 0.25);
    const ModuleSequence seq = wavelet_sequence(g, 2, NonlinKind::modulus);
    const Signal f = oracles::random_signal(g, 9);
    const Signal h = oracles::random_signal(g, 10);
    const FeatureCollection A = extract_features(seq, f);
    const FeatureCollection B = extract_features(seq, h);
    SECTION("zero iff equal") {
        REQUIRE(feature_distance(A, A) == 0.0);
        REQUIRE(feature_distance(A, B) > 0.0);
    }
    SECTION("identity configuration reduces to the L2 distance") {
        const ModuleSequence id = identity_sequence(g);
        const double via_features = feature_distance(extract_features(id, f), extract_features(id, h));
        REQUIRE(via_features == l2_distance(f, h));  // same accumulation, bit-exact
    }
    SECTION("flat sum agrees with per-layer accumulation") {
        const double flat = feature_distance(A, B);
        double per_layer = 0.0;
        for (std::size_t n = 0; n < A.layers.size(); ++n) {
            double layer_acc = 0.0;
            for (std::size_t i = 0; i < A.layers[n].size(); ++i)
                layer_acc += squared_l2_norm(A.layers[n][i].output - B.layers[n][i].output);
            per_layer += layer_acc;
        }
        REQUIRE(std::sqrt(per_layer) == Catch::Approx(flat).epsilon(1e-12));
    }
    SECTION("structural mismatch is rejected") {
        const FeatureCollection C = extract_features(wavelet_sequence(g, 1, NonlinKind::modulus), f);
        REQUIRE_THROWS_AS(feature_distance(A, C), std::invalid_argument);
    }
}

TEST_CASE("per-layer energy bound under weak admissibility") {
    Grid g = Grid::line(256, 0.125);
    SECTION("R = 1, modulus: exact frame + Lipschitz chain") {
        Module m{normalize_bank(make_wavelet_bank(g, 3), 1.0).bank, Nonlinearity{NonlinKind::modulus}, 1};
        for (std::uint64_t s = 0; s < 20; ++s) {
            const Signal f = oracles::random_signal(g, 400 + s);
            double acc = squared_l2_norm(fft_convolve(f, m.bank.output_atom.filter));
            for (std::size_t a = 0; a < m.bank.atoms.size(); ++a)
                acc += squared_l2_norm(propagate_one(m, f, a));
            REQUIRE(acc <= squared_l2_norm(f) * (1.0 + 1e-8));
        }
    }
    SECTION("R = 2, identity non-linearity on band-limited content") {
        // Gaussian-tailed atoms leak energy beyond the decimated Nyquist at
        // ~1e-20, so the bound still holds at the 1e-8 gate.
        Module m{normalize_bank(make_wavelet_bank(g, 2), 1.0).bank, Nonlinearity{NonlinKind::identity}, 2};
        for (std::uint64_t s = 0; s < 10; ++s) {
            const Signal f = oracles::random_bandlimited_signal(g, 500 + s, 2);
            double acc = squared_l2_norm(fft_convolve(f, m.bank.output_atom.filter));
            for (std::size_t a = 0; a < m.bank.atoms.size(); ++a)
                acc += squared_l2_norm(propagate_one(m, f, a));
            REQUIRE(acc <= squared_l2_norm(f) * (1.0 + 1e-8));
        }
    }
}

TEST_CASE("contractivity of admissible sequences") {
    Grid g = Grid::line(128, 0.25);
    SECTION("identity extractor has ratio exactly 1") {
        const ModuleSequence id = identity_sequence(g);
        const Signal f = oracles::random_signal(g, 20);
        const Signal h = oracles::random_signal(g, 21);
        REQUIRE(contractivity_ratio(id, f, h) == 1.0);
    }
    SECTION("admissible wavelet/modulus depth 2 never expands distances") {
        const ModuleSequence seq = wavelet_sequence(g, 2, NonlinKind::modulus);
        for (std::uint64_t s = 0; s < 25; ++s) {
            const Signal f = oracles::random_signal(g, 600 + 2 * s);
            const Signal h = oracles::random_signal(g, 601 + 2 * s);
            REQUIRE(contractivity_ratio(seq, f, h, /*parallel=*/false) <= 1.0 + 1e-8);
        }
    }
    SECTION("inadmissible sequences are refused with the violating layer") {
        ModuleSequence seq = identity_sequence(g);
        for (cplx& v : seq.modules[0].bank.output_atom.filter.samples) v *= 2.0;  // bound 4
        const Signal f = oracles::random_signal(g, 30);
        const Signal h = oracles::random_signal(g, 31);
        REQUIRE_THROWS_WITH(contractivity_ratio(seq, f, h),
                            Catch::Matchers::ContainsSubstring("admissibility") &&
                                Catch::Matchers::ContainsSubstring("layer 0"));
    }
    SECTION("coincident inputs are rejected") {
        const ModuleSequence id = identity_sequence(g);
        const Signal f = oracles::random_signal(g, 33);
        REQUIRE_THROWS_AS(contractivity_ratio(id, f, f), std::invalid_argument);
    }
}

TEST_CASE("depth truncation never increases the feature norm") {
    Grid g = Grid::line(128, 0.25);
    const Signal f = oracles::random_signal(g, 40);
    double prev = -1.0;
    for (std::size_t depth = 0; depth <= 3; ++depth) {
        const ModuleSequence seq = wavelet_sequence(g, depth, NonlinKind::modulus, 2);
        const double norm = extract_features(seq, f).norm();
        if (depth > 0) REQUIRE(norm >= prev - 1e-12);
        prev = norm;
    }
}

TEST_CASE("layer node energy exposes the truncation tail") {
    Grid g = Grid::line(128, 0.25);
    const ModuleSequence seq = wavelet_sequence(g, 2, NonlinKind::modulus);
    const Signal f = oracles::random_signal(g, 50);
    const FeatureCollection fc = extract_features(seq, f);
    REQUIRE(fc.layer_node_energy.size() == 3);
    REQUIRE(fc.layer_node_energy[0] == Catch::Approx(squared_l2_norm(f)));
    // energy decreases down the tree for an admissible sequence
    REQUIRE(fc.layer_node_energy[1] <= fc.layer_node_energy[0] * (1.0 + 1e-8));
    REQUIRE(fc.layer_node_energy[2] <= fc.layer_node_energy[1] * (1.0 + 1e-8));
}

TEST_CASE("internal signals can be retained per layer") {
    Grid g = Grid::line(128, 0.25);
    const ModuleSequence seq = wavelet_sequence(g, 2, NonlinKind::modulus, 2);
    const Signal f = oracles::random_signal(g, 60);
    const FeatureCollection fc = extract_features(seq, f, /*parallel=*/false, /*retain_internal=*/true);
    REQUIRE(fc.internal[0].size() == 1);
    REQUIRE(fc.internal[0][0].samples == f.samples);
    REQUIRE(fc.internal[1].size() == 2);
    REQUIRE(fc.internal[2].size() == 4);
    // retained nodes reproduce propagate_one applied along the path
    const Signal u0 = propagate_one(seq.modules[0], f, 1);
    REQUIRE(fc.internal[1][1].samples == u0.samples);
    const FeatureCollection lean = extract_features(seq, f, false, false);
    REQUIRE(lean.internal[1].empty());
}

TEST_CASE("sub-sampled module chains change grids layer by layer") {
    Grid g = Grid::line(256, 0.125);
    ModuleSequence seq;
    seq.max_depth = 1;
    Module m0{normalize_bank(make_wavelet_bank(g, 2), 1.0).bank, Nonlinearity{NonlinKind::modulus}, 2};
    const Grid g1 = m0.output_grid();
    REQUIRE(g1.extent[0] == 128);
    REQUIRE(g1.spacing == g.spacing);  // dilation realization keeps the spacing
    Module m1{normalize_bank(make_wavelet_bank(g1, 2), 1.0).bank, Nonlinearity{NonlinKind::modulus}, 2};
    seq.modules = {m0, m1};
    REQUIRE_NOTHROW(seq.validate());
    const FeatureCollection fc = extract_features(seq, oracles::random_signal(g, 61));
    REQUIRE(fc.total_features() == 1 + 2);
    REQUIRE(fc.layers[0][0].output.grid.extent[0] == 256);
    REQUIRE(fc.layers[1][0].output.grid.extent[0] == 128);
}

TEST_CASE("module sequence validation") {
    Grid g = Grid::line(64, 0.5);
    SECTION("missing modules for the requested depth") {
        ModuleSequence seq = identity_sequence(g);
        seq.max_depth = 1;
        REQUIRE_THROWS_AS(seq.validate(), std::invalid_argument);
    }
    SECTION("broken grid chain") {
        ModuleSequence seq;
        seq.max_depth = 1;
        Module m0{normalize_bank(make_wavelet_bank(g, 2), 1.0).bank, Nonlinearity{NonlinKind::modulus}, 2};
        seq.modules.push_back(m0);
        seq.modules.push_back(identity_module(g));  // wrong grid: m0 halves the extent
        REQUIRE_THROWS_AS(seq.validate(), std::invalid_argument);
    }
}
