#pragma once

// Layered feature extraction: per-layer triplets (filter bank, pointwise
// non-linearity, sub-sampling factor), path propagation, and the feature
// collection with its aggregate norm.

#include <cmath>
#include <cstddef>
#include <future>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "scatstab/frames.hpp"
#include "scatstab/signal.hpp"

namespace scatstab {

// ---------------------------------------------------------------------------
// Non-linearities
// ---------------------------------------------------------------------------

enum class NonlinKind { modulus, relu, tanh, sigmoid, identity };

inline NonlinKind nonlin_from_string(const std::string& s) {
    if (s == "modulus") return NonlinKind::modulus;
    if (s == "relu") return NonlinKind::relu;
    if (s == "tanh") return NonlinKind::tanh;
    if (s == "sigmoid") return NonlinKind::sigmoid;
    if (s == "identity") return NonlinKind::identity;
    throw std::invalid_argument("unknown non-linearity: " + s);
}

// Pointwise non-linearity with a known Lipschitz constant; maps 0 to 0.
// relu/tanh/sigmoid act on real and imaginary parts independently; the
// logistic sigmoid is shifted by sigma(0) so the zero-input contract holds.
struct Nonlinearity {
    NonlinKind kind = NonlinKind::modulus;

    double lipschitz() const { return kind == NonlinKind::sigmoid ? 0.25 : 1.0; }

    const char* name() const {
        switch (kind) {
            case NonlinKind::modulus: return "modulus";
            case NonlinKind::relu: return "relu";
            case NonlinKind::tanh: return "tanh";
            case NonlinKind::sigmoid: return "sigmoid";
            case NonlinKind::identity: return "identity";
        }
        return "?";
    }

    cplx apply(cplx z) const {
        switch (kind) {
            case NonlinKind::modulus: return cplx(std::abs(z), 0.0);
            case NonlinKind::relu: return cplx(std::max(z.real(), 0.0), std::max(z.imag(), 0.0));
            case NonlinKind::tanh: return cplx(std::tanh(z.real()), std::tanh(z.imag()));
            case NonlinKind::sigmoid: {
                auto s = [](double t) { return 1.0 / (1.0 + std::exp(-t)) - 0.5; };
                return cplx(s(z.real()), s(z.imag()));
            }
            case NonlinKind::identity: return z;
        }
        return z;
    }

    Signal apply(const Signal& f) const {
        if (kind == NonlinKind::identity) return f;
        Signal out(f.grid);
        for (std::size_t i = 0; i < f.samples.size(); ++i) out.samples[i] = apply(f.samples[i]);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Modules and sequences
// ---------------------------------------------------------------------------

struct Module {
    FilterBank bank;
    Nonlinearity nonlinearity;
    std::size_t subsampling = 1;

    Grid input_grid() const { return bank.grid; }

    Grid output_grid() const {
        if (subsampling == 1) return bank.grid;
        std::array<std::size_t, 2> ext = bank.grid.extent;
        for (int a = 0; a < bank.grid.dim; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            if (ext[ua] % subsampling != 0)
                throw std::invalid_argument("Module: sub-sampling factor does not divide extent");
            ext[ua] /= subsampling;
        }
        return Grid(bank.grid.dim, ext, bank.grid.spacing);
    }
};

// A depth-truncated module sequence. Features exist at layers 0..max_depth;
// layer n uses modules[n]'s output atom, and propagation from layer n to
// layer n+1 uses modules[n]'s propagation atoms, so max_depth+1 modules are
// required (the last module's propagation atoms are unused).
struct ModuleSequence {
    std::vector<Module> modules;
    std::size_t max_depth = 0;

    void validate() const {
        if (modules.size() < max_depth + 1)
            throw std::invalid_argument("ModuleSequence: need max_depth+1 modules");
        for (std::size_t n = 0; n < max_depth; ++n) {
            if (modules[n].output_grid() != modules[n + 1].input_grid())
                throw std::invalid_argument("ModuleSequence: grid chain broken at module " +
                                            std::to_string(n));
        }
        for (const Module& m : modules) m.bank.validate();
    }

    Grid input_grid() const {
        if (modules.empty()) throw std::invalid_argument("ModuleSequence: empty");
        return modules.front().input_grid();
    }
};

// Violation report for the weak admissibility check.
struct AdmissibilityReport {
    bool admissible = true;
    std::size_t violating_layer = 0;
    double value = 0.0;  // bessel_bound * max(1, L^2) at the violating layer
};

inline AdmissibilityReport check_admissibility(const ModuleSequence& seq, double tol = 1e-9) {
    for (std::size_t n = 0; n <= seq.max_depth; ++n) {
        const Module& m = seq.modules[n];
        const double L = m.nonlinearity.lipschitz();
        const double v = bessel_bound(m.bank) * std::max(1.0, L * L);
        if (v > 1.0 + tol) return {false, n, v};
    }
    return {true, 0, 0.0};
}

// ---------------------------------------------------------------------------
// Paths and features
// ---------------------------------------------------------------------------

// A path is the tuple of propagation-atom indices taken through the layers;
// the empty path denotes the input itself.
struct Path {
    std::vector<std::size_t> labels;

    bool operator<(const Path& o) const { return labels < o.labels; }
    bool operator==(const Path& o) const { return labels == o.labels; }

    std::string to_string(const ModuleSequence& seq) const {
        if (labels.empty()) return "e";
        std::string s;
        for (std::size_t k = 0; k < labels.size(); ++k) {
            if (k) s += ".";
            s += seq.modules[k].bank.atoms[labels[k]].label;
        }
        return s;
    }
};

struct Feature {
    Path path;
    Signal output;  // (U[path] f) * output_atom
};

struct FeatureCollection {
    std::vector<std::vector<Feature>> layers;   // layers[n]: features of length-n paths
    std::vector<double> layer_node_energy;      // sum over |q|=n of ||U[q]f||^2 (truncation diagnostics)
    std::vector<std::vector<Signal>> internal;  // optional: the propagated signals U[q]f, per layer

    std::size_t total_features() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.size();
        return n;
    }

    double squared_norm() const {
        double acc = 0.0;
        for (const auto& l : layers)
            for (const Feature& f : l) acc += squared_l2_norm(f.output);
        return acc;
    }

    double norm() const { return std::sqrt(squared_norm()); }
};

// One layer application along one propagation atom:
// subsample(M(f * g_atom), R).
inline Signal propagate_one(const Module& m, const Signal& f, std::size_t atom_index) {
    if (atom_index >= m.bank.atoms.size()) throw std::invalid_argument("propagate_one: unknown atom label");
    if (f.grid != m.bank.grid) throw std::invalid_argument("propagate_one: grid mismatch");
    return subsample(m.nonlinearity.apply(fft_convolve(f, m.bank.atoms[atom_index].filter)), m.subsampling);
}

namespace detail {

struct NodeResult {
    std::vector<std::vector<Feature>> layers;  // indexed by depth offset from the node
    std::vector<double> node_energy;
    std::vector<std::vector<Signal>> internal;
};

// Depth-first evaluation of the sub-tree rooted at `node` (a signal at layer
// `depth`). Deterministic: children are visited in atom order.
inline NodeResult extract_subtree(const ModuleSequence& seq, const Signal& node, std::size_t depth,
                                  const Path& path, bool retain_internal) {
    const Module& m = seq.modules[depth];
    NodeResult res;
    res.layers.resize(seq.max_depth - depth + 1);
    res.node_energy.assign(seq.max_depth - depth + 1, 0.0);
    res.internal.resize(seq.max_depth - depth + 1);
    res.node_energy[0] = squared_l2_norm(node);
    if (retain_internal) res.internal[0].push_back(node);
    res.layers[0].push_back(Feature{path, fft_convolve(node, m.bank.output_atom.filter)});
    if (depth == seq.max_depth) return res;
    for (std::size_t a = 0; a < m.bank.atoms.size(); ++a) {
        Path child_path = path;
        child_path.labels.push_back(a);
        const Signal child = propagate_one(m, node, a);
        NodeResult sub = extract_subtree(seq, child, depth + 1, child_path, retain_internal);
        for (std::size_t off = 0; off < sub.layers.size(); ++off) {
            auto& dst = res.layers[off + 1];
            for (Feature& f : sub.layers[off]) dst.push_back(std::move(f));
            res.node_energy[off + 1] += sub.node_energy[off];
            for (Signal& s : sub.internal[off]) res.internal[off + 1].push_back(std::move(s));
        }
    }
    return res;
}

}  // namespace detail

// The full feature map: layer n holds (U[q]f) * output_atom_n for every
// length-n path over the propagation atoms, n = 0..max_depth. Sibling
// sub-trees under the first layer are evaluated concurrently; the assembled
// ordering (and hence any serialized output) is deterministic.
inline FeatureCollection extract_features(const ModuleSequence& seq, const Signal& f,
                                          bool parallel = true, bool retain_internal = false) {
    seq.validate();
    if (f.grid != seq.input_grid()) throw std::invalid_argument("extract_features: grid mismatch");
    FeatureCollection out;
    out.layers.resize(seq.max_depth + 1);
    out.layer_node_energy.assign(seq.max_depth + 1, 0.0);
    out.internal.resize(seq.max_depth + 1);
    out.layer_node_energy[0] = squared_l2_norm(f);
    if (retain_internal) out.internal[0].push_back(f);
    const Module& m0 = seq.modules[0];
    out.layers[0].push_back(Feature{Path{}, fft_convolve(f, m0.bank.output_atom.filter)});
    if (seq.max_depth == 0) return out;

    std::vector<detail::NodeResult> sub(m0.bank.atoms.size());
    auto eval = [&](std::size_t a) {
        Path p;
        p.labels.push_back(a);
        return detail::extract_subtree(seq, propagate_one(m0, f, a), 1, p, retain_internal);
    };
    if (parallel && m0.bank.atoms.size() > 1) {
        std::vector<std::future<detail::NodeResult>> futures;
        futures.reserve(m0.bank.atoms.size());
        for (std::size_t a = 0; a < m0.bank.atoms.size(); ++a)
            futures.push_back(std::async(std::launch::async, eval, a));
        for (std::size_t a = 0; a < sub.size(); ++a) sub[a] = futures[a].get();
    } else {
        for (std::size_t a = 0; a < sub.size(); ++a) sub[a] = eval(a);
    }
    for (std::size_t a = 0; a < sub.size(); ++a) {
        for (std::size_t off = 0; off < sub[a].layers.size(); ++off) {
            auto& dst = out.layers[off + 1];
            for (Feature& fe : sub[a].layers[off]) dst.push_back(std::move(fe));
            out.layer_node_energy[off + 1] += sub[a].node_energy[off];
            for (Signal& s : sub[a].internal[off]) out.internal[off + 1].push_back(std::move(s));
        }
    }
    return out;
}

// Feature-space distance: root of the summed squared L^2 distances over all
// features. Requires structurally identical collections.
inline double feature_distance(const FeatureCollection& A, const FeatureCollection& B) {
    if (A.layers.size() != B.layers.size())
        throw std::invalid_argument("feature_distance: depth mismatch");
    double acc = 0.0;
    for (std::size_t n = 0; n < A.layers.size(); ++n) {
        if (A.layers[n].size() != B.layers[n].size())
            throw std::invalid_argument("feature_distance: layer size mismatch");
        for (std::size_t i = 0; i < A.layers[n].size(); ++i) {
            const Feature &fa = A.layers[n][i], &fb = B.layers[n][i];
            if (!(fa.path == fb.path) || fa.output.grid != fb.output.grid)
                throw std::invalid_argument("feature_distance: structural mismatch");
            acc += squared_l2_norm(fa.output - fb.output);
        }
    }
    return std::sqrt(acc);
}

// ||Phi(f) - Phi(h)||| / ||f - h||; requires a weakly admissible sequence
// and f != h. Contract: <= 1 (+ float tolerance) by the per-layer frame and
// Lipschitz bounds.
inline double contractivity_ratio(const ModuleSequence& seq, const Signal& f, const Signal& h,
                                  bool parallel = true) {
    const AdmissibilityReport adm = check_admissibility(seq);
    if (!adm.admissible)
        throw std::invalid_argument("contractivity_ratio: sequence violates weak admissibility at layer " +
                                    std::to_string(adm.violating_layer) +
                                    " (bessel*max(1,L^2) = " + std::to_string(adm.value) + ")");
    const double denom = l2_distance(f, h);
    if (denom == 0.0) throw std::invalid_argument("contractivity_ratio: f and h coincide");
    const FeatureCollection A = extract_features(seq, f, parallel);
    const FeatureCollection B = extract_features(seq, h, parallel);
    return feature_distance(A, B) / denom;
}

}  // namespace scatstab
