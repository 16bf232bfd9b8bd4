#pragma once

#include "qgraph/candidates.hpp"
#include "qgraph/chain.hpp"
#include "qgraph/csv.hpp"
#include "qgraph/point_interaction.hpp"
#include "qgraph/symmetry.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <sstream>
#include <string>

namespace qgraph {

using json = nlohmann::ordered_json;

struct BandParams {
    double k_min = 0.05;
    double k_max = 6.3;
    int samples = 400;
};

struct EigenfunctionParams {
    double k = 1.0 / pi;
    int points_per_edge = 32;
    bool bloch = true;
};

struct ClosedParams {
    int m = 2;
    double k_max = 2.0 * pi;
    int samples = 2000;
};

struct PointIntParams {
    double alpha = 1.0;
    double k = 1.0;
    double x_min = -8.0;
    double x_max = 8.0;
    int samples = 401;
};

struct RunConfig {
    ChainConfig chain;
    std::optional<ThetaAssignment> theta;  // explicit twist phases, if given
    BandParams band;
    EigenfunctionParams eigenfunction;
    ClosedParams closed;
    PointIntParams pointint;
};

/// Malformed configuration document (unknown keys, wrong shapes).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) ok = true;
        if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

inline std::vector<double> parse_alphas(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3)
        throw ConfigError(where + " must be a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace detail

/// Parse a run configuration. Per-cell overrides are indexed by absolute cell
/// index; cells not listed fall back to the constant rule. Twist phases are
/// one constant per (cell, edge kind) - an x-dependent profile has no
/// representation here and unknown keys are rejected.
inline RunConfig parse_run_config(const json& j) {
    RunConfig cfg;
    detail::check_keys(j, {"chain", "band", "eigenfunction", "closed", "pointint"},
                       "config root");
    if (j.contains("chain")) {
        const json& c = j.at("chain");
        detail::check_keys(c,
                           {"window", "l_u", "l_v", "delta", "alphas", "delta_per_cell",
                            "alphas_per_cell", "theta"},
                           "chain");
        if (c.contains("window")) {
            cfg.chain.window = {c.at("window").at(0).get<int>(),
                                c.at("window").at(1).get<int>()};
            require(cfg.chain.window.size() >= 1, "window must be nonempty");
        }
        cfg.chain.l_u = c.value("l_u", 1.0);
        cfg.chain.l_v = c.value("l_v", 1.0);
        cfg.chain.base.delta = c.value("delta", 0.0);
        if (c.contains("alphas"))
            cfg.chain.base.alphas = detail::parse_alphas(c.at("alphas"), "chain.alphas");
        else
            cfg.chain.base.alphas = {0.0, 0.0, 0.0};

        auto override_at = [&cfg](int cell) -> QuasiDeltaParams& {
            return cfg.chain.overrides.try_emplace(cell, cfg.chain.base).first->second;
        };
        if (c.contains("delta_per_cell")) {
            for (const json& e : c.at("delta_per_cell")) {
                detail::check_keys(e, {"cell", "value"}, "delta_per_cell entry");
                override_at(e.at("cell").get<int>()).delta = e.at("value").get<double>();
            }
        }
        if (c.contains("alphas_per_cell")) {
            for (const json& e : c.at("alphas_per_cell")) {
                detail::check_keys(e, {"cell", "value"}, "alphas_per_cell entry");
                override_at(e.at("cell").get<int>()).alphas =
                    detail::parse_alphas(e.at("value"), "alphas_per_cell value");
            }
        }
        if (c.contains("theta")) {
            ThetaAssignment th = ThetaAssignment::zero(cfg.chain.window);
            for (const json& e : c.at("theta")) {
                detail::check_keys(e, {"cell", "u", "v"}, "theta entry");
                const int cell = e.at("cell").get<int>();
                require(cfg.chain.window.contains(cell), "theta cell outside window");
                if (e.contains("u")) th.set_u(cell, e.at("u").get<double>());
                if (e.contains("v")) th.set_v(cell, e.at("v").get<double>());
            }
            cfg.theta = th;
        }
    }
    if (j.contains("band")) {
        const json& b = j.at("band");
        detail::check_keys(b, {"k_min", "k_max", "samples"}, "band");
        cfg.band.k_min = b.value("k_min", cfg.band.k_min);
        cfg.band.k_max = b.value("k_max", cfg.band.k_max);
        cfg.band.samples = b.value("samples", cfg.band.samples);
    }
    if (j.contains("eigenfunction")) {
        const json& e = j.at("eigenfunction");
        detail::check_keys(e, {"k", "points_per_edge", "bloch"}, "eigenfunction");
        cfg.eigenfunction.k = e.value("k", cfg.eigenfunction.k);
        cfg.eigenfunction.points_per_edge =
            e.value("points_per_edge", cfg.eigenfunction.points_per_edge);
        cfg.eigenfunction.bloch = e.value("bloch", cfg.eigenfunction.bloch);
    }
    if (j.contains("closed")) {
        const json& cl = j.at("closed");
        detail::check_keys(cl, {"m", "k_max", "samples"}, "closed");
        cfg.closed.m = cl.value("m", cfg.closed.m);
        cfg.closed.k_max = cl.value("k_max", cfg.closed.k_max);
        cfg.closed.samples = cl.value("samples", cfg.closed.samples);
    }
    if (j.contains("pointint")) {
        const json& p = j.at("pointint");
        detail::check_keys(p, {"alpha", "k", "x_min", "x_max", "samples"}, "pointint");
        cfg.pointint.alpha = p.value("alpha", cfg.pointint.alpha);
        cfg.pointint.k = p.value("k", cfg.pointint.k);
        cfg.pointint.x_min = p.value("x_min", cfg.pointint.x_min);
        cfg.pointint.x_max = p.value("x_max", cfg.pointint.x_max);
        cfg.pointint.samples = p.value("samples", cfg.pointint.samples);
    }
    cfg.chain.validate();
    return cfg;
}

/// Re-emit a configuration with every default materialized and stable key
/// order, so validate(emit(parse(x))) is reproducible byte for byte.
inline json canonical_config(const RunConfig& cfg) {
    json j;
    json chain;
    chain["window"] = {cfg.chain.window.first, cfg.chain.window.last};
    chain["l_u"] = cfg.chain.l_u;
    chain["l_v"] = cfg.chain.l_v;
    chain["delta"] = cfg.chain.base.delta;
    chain["alphas"] = cfg.chain.base.alphas;
    if (!cfg.chain.overrides.empty()) {
        json dpc = json::array();
        json apc = json::array();
        for (const auto& [cell, p] : cfg.chain.overrides) {
            dpc.push_back({{"cell", cell}, {"value", p.delta}});
            apc.push_back({{"cell", cell}, {"value", p.alphas}});
        }
        chain["delta_per_cell"] = dpc;
        chain["alphas_per_cell"] = apc;
    }
    if (cfg.theta) {
        json th = json::array();
        for (int i = cfg.theta->window.first; i <= cfg.theta->window.last; ++i)
            th.push_back({{"cell", i}, {"u", cfg.theta->u(i)}, {"v", cfg.theta->v(i)}});
        chain["theta"] = th;
    }
    j["chain"] = chain;
    j["band"] = {{"k_min", cfg.band.k_min},
                 {"k_max", cfg.band.k_max},
                 {"samples", cfg.band.samples}};
    j["eigenfunction"] = {{"k", cfg.eigenfunction.k},
                          {"points_per_edge", cfg.eigenfunction.points_per_edge},
                          {"bloch", cfg.eigenfunction.bloch}};
    j["closed"] = {{"m", cfg.closed.m},
                   {"k_max", cfg.closed.k_max},
                   {"samples", cfg.closed.samples}};
    j["pointint"] = {{"alpha", cfg.pointint.alpha},
                     {"k", cfg.pointint.k},
                     {"x_min", cfg.pointint.x_min},
                     {"x_max", cfg.pointint.x_max},
                     {"samples", cfg.pointint.samples}};
    return j;
}

/// Deterministic human-readable report: block spectra, gap margin, and the
/// shift-invariance verdict with either the solved twist phases or the
/// obstruction vertex.
inline std::string validate_report(const RunConfig& cfg) {
    std::ostringstream out;
    const ChainConfig& ch = cfg.chain;
    out << "window: [" << ch.window.first << ", " << ch.window.last << "]\n";
    out << "lengths: l_u=" << format_g17(ch.l_u) << " l_v=" << format_g17(ch.l_v) << "\n";

    const BlockUnitary blocks = chain_block_unitary(ch);
    const BlockSpectrum spec = blockwise_spectrum(blocks);
    out << "block eigenvalues (distinct to 1e-9):";
    std::vector<Complex> distinct;
    for (const Complex& w : spec.eigenvalues) {
        bool seen = false;
        for (const Complex& d : distinct)
            if (std::abs(d - w) < 1e-9) seen = true;
        if (!seen) distinct.push_back(w);
    }
    for (const Complex& w : distinct)
        out << " (" << format_g17(w.real()) << ", " << format_g17(w.imag()) << ")";
    out << "\n";
    out << "gap at -1: " << (spec.gap_at_minus_one ? "yes" : "no")
        << ", margin " << format_g17(spec.margin) << "\n";

    bool delta_constant = true;
    for (int i = ch.window.first; i <= ch.window.last; ++i)
        if (std::abs(angle_distance(ch.params_at(i).delta - ch.base_delta())) > 1e-9)
            delta_constant = false;
    if (!delta_constant) {
        double residual = 1.0;
        if (cfg.theta) {
            const auto per_cell = ch.per_cell();
            residual = check_z_invariance(per_cell, *cfg.theta);
        }
        out << "Z-invariant: no (delta varies across cells; eigenvalue mismatch)\n";
        if (cfg.theta)
            out << "explicit-theta residual: " << format_g17(residual) << "\n";
        return out.str();
    }

    const auto per_cell = ch.per_cell();
    if (cfg.theta) {
        const double residual = check_z_invariance(per_cell, *cfg.theta);
        out << "explicit theta supplied; invariance residual "
            << format_g17(residual) << "\n";
        out << "Z-invariant: " << (residual < 1e-9 ? "yes" : "no") << "\n";
        return out.str();
    }

    const ThetaSolution sol = solve_theta(per_cell, ch.window);
    if (!sol) {
        out << "Z-invariant: no, obstruction at vertex " << sol.obstruction_cell
            << " (loop phase gap alpha_1-alpha_2 changes there)\n";
        return out.str();
    }
    const double residual = check_z_invariance(per_cell, *sol.theta);
    out << "Z-invariant: " << (residual < 1e-10 ? "yes" : "no") << ", residual "
        << format_g17(residual) << "\n";
    out << "theta:";
    for (int i = ch.window.first; i <= ch.window.last; ++i)
        out << " cell " << i << " (u=" << format_g17(sol.theta->u(i))
            << ", v=" << format_g17(sol.theta->v(i)) << ")";
    out << "\n";
    return out.str();
}

}  // namespace qgraph
