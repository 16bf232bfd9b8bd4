// Command-line front end: validates chain configurations and writes CSV
// tables for band scans, eigenfunction samples, closed-chain spectra and the
// point-interaction reference model.
//
// Exit codes: 0 success, 1 configuration/parse errors, 2 domain errors.

#include "qgraph/candidates.hpp"
#include "qgraph/csv.hpp"
#include "qgraph/point_interaction.hpp"
#include "qgraph/run_config.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace qgraph;

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::optional<double> k, kmin, kmax;
    std::optional<int> samples, m, cells, points;
    std::optional<double> alpha;
};

RunConfig load_config(const CommonArgs& a) {
    RunConfig cfg;
    if (!a.config_path.empty()) {
        std::ifstream in(a.config_path);
        if (!in) throw ConfigError("cannot open config file " + a.config_path);
        json j = json::parse(in);
        cfg = parse_run_config(j);
    }
    if (a.cells) {
        require(*a.cells >= 1, "--cells must be positive");
        cfg.chain.window = {0, *a.cells - 1};
    }
    if (a.k) {
        cfg.eigenfunction.k = *a.k;
        cfg.pointint.k = *a.k;
    }
    if (a.kmin) cfg.band.k_min = *a.kmin;
    if (a.kmax) {
        cfg.band.k_max = *a.kmax;
        cfg.closed.k_max = *a.kmax;
    }
    if (a.samples) {
        cfg.band.samples = *a.samples;
        cfg.closed.samples = *a.samples;
        cfg.pointint.samples = *a.samples;
    }
    if (a.m) cfg.closed.m = *a.m;
    if (a.points) cfg.eigenfunction.points_per_edge = *a.points;
    if (a.alpha) cfg.pointint.alpha = *a.alpha;
    cfg.chain.validate();
    return cfg;
}

std::ostream& open_out(const CommonArgs& a, std::ofstream& file) {
    if (a.out_path.empty()) return std::cout;
    file.open(a.out_path, std::ios::binary);
    if (!file) throw std::domain_error("cannot open output file " + a.out_path);
    return file;
}

void cmd_validate(const CommonArgs& a) {
    const RunConfig cfg = load_config(a);
    std::cout << validate_report(cfg);
    if (!a.out_path.empty()) {
        std::ofstream out(a.out_path, std::ios::binary);
        if (!out) throw std::domain_error("cannot open output file " + a.out_path);
        out << canonical_config(cfg).dump(2) << "\n";
    }
}

void cmd_block(const CommonArgs& a) {
    const RunConfig cfg = load_config(a);
    const auto& p = cfg.chain.params_at(cfg.chain.window.first);
    const VertexUnitary u = node_condition_unitary(p);
    std::cout << "node condition block (cell " << cfg.chain.window.first << "):\n";
    for (int r = 0; r < u.dim(); ++r) {
        for (int c = 0; c < u.dim(); ++c)
            std::cout << (c ? " " : "") << "(" << format_g17(u.matrix(r, c).real()) << ","
                      << format_g17(u.matrix(r, c).imag()) << ")";
        std::cout << "\n";
    }
    BlockUnitary single;
    single.blocks[0] = u;
    const BlockSpectrum s = blockwise_spectrum(single);
    std::cout << "eigenvalues:";
    for (const Complex& w : s.eigenvalues)
        std::cout << " (" << format_g17(w.real()) << "," << format_g17(w.imag()) << ")";
    std::cout << "\ngap margin: " << format_g17(s.margin) << "\n";
    const CMatrix cayley = partial_cayley(u);
    std::cout << "partial Cayley transform:\n";
    for (int r = 0; r < u.dim(); ++r) {
        for (int c = 0; c < u.dim(); ++c)
            std::cout << (c ? " " : "") << "(" << format_g17(cayley(r, c).real()) << ","
                      << format_g17(cayley(r, c).imag()) << ")";
        std::cout << "\n";
    }
}

void cmd_invariance(const CommonArgs& a) {
    const RunConfig cfg = load_config(a);
    const auto per_cell = cfg.chain.per_cell();
    if (cfg.theta) {
        std::cout << "explicit-theta residual: "
                  << format_g17(check_z_invariance(per_cell, *cfg.theta)) << "\n";
        return;
    }
    const ThetaSolution sol = solve_theta(per_cell, cfg.chain.window);
    if (!sol) {
        std::cout << "no invariant twist: obstruction at vertex " << sol.obstruction_cell
                  << "\n";
        return;
    }
    std::cout << "residual: " << format_g17(check_z_invariance(per_cell, *sol.theta))
              << "\n";
    for (int i = cfg.chain.window.first; i <= cfg.chain.window.last; ++i)
        std::cout << "cell " << i << " theta_u " << format_g17(sol.theta->u(i))
                  << " theta_v " << format_g17(sol.theta->v(i)) << "\n";
}

void cmd_band(const CommonArgs& a) {
    const RunConfig cfg = load_config(a);
    const auto scan = band_structure(cfg.chain, cfg.band.k_min, cfg.band.k_max,
                                     cfg.band.samples);
    std::ofstream file;
    std::ostream& out = open_out(a, file);
    out << "k,lambda1_re,lambda1_im,lambda2_re,lambda2_im,in_band\n";
    for (const auto& s : scan)
        out << format_g17(s.k) << "," << format_g17(s.lambda1.real()) << ","
            << format_g17(s.lambda1.imag()) << "," << format_g17(s.lambda2.real()) << ","
            << format_g17(s.lambda2.imag()) << "," << (s.in_band ? 1 : 0) << "\n";
}

void cmd_eigenfunction(const CommonArgs& a) {
    const RunConfig cfg = load_config(a);
    EigenCandidate cand;
    if (cfg.eigenfunction.bloch) {
        cand = build_candidate(cfg.chain, cfg.eigenfunction.k, {}, Complex(1.0, 0.0));
    } else {
        cand = build_candidate(cfg.chain, cfg.eigenfunction.k, {1.0, 0.0});
    }
    const auto rows = sample_eigenfunction(cfg.chain, cand, cfg.eigenfunction.points_per_edge);
    std::ofstream file;
    std::ostream& out = open_out(a, file);
    out << "cell,kind,x,re,im,abs\n";
    for (const auto& r : rows)
        out << r.cell << "," << r.kind << "," << format_g17(r.x) << "," << format_g17(r.re)
            << "," << format_g17(r.im) << "," << format_g17(r.abs) << "\n";
}

void cmd_closed(const CommonArgs& a) {
    const RunConfig cfg = load_config(a);
    const ClosedChainResult res =
        closed_chain_spectrum(cfg.chain, cfg.closed.m, cfg.closed.k_max, cfg.closed.samples);
    std::ofstream file;
    std::ostream& out = open_out(a, file);
    out << "k,n,residual\n";
    for (const auto& r : res.roots)
        out << format_g17(r.k) << "," << r.n << "," << format_g17(r.residual) << "\n";
    if (res.grid_warning)
        std::cerr << "warning: roots remained within one grid step after "
                  << res.refinements << " refinements\n";
}

void cmd_pointint(const CommonArgs& a) {
    const RunConfig cfg = load_config(a);
    const PointInteractionModel model{cfg.pointint.alpha};
    const double k = cfg.pointint.k;
    require(k != 0.0, "pointint needs nonzero k");
    std::vector<double> xs(cfg.pointint.samples);
    for (int i = 0; i < cfg.pointint.samples; ++i)
        xs[i] = cfg.pointint.x_min +
                (cfg.pointint.x_max - cfg.pointint.x_min) * i /
                    std::max(1, cfg.pointint.samples - 1);
    std::ofstream file;
    std::ostream& out = open_out(a, file);
    out << "x,formula_re,formula_im,oracle_re,oracle_im\n";
    for (double x : xs) {
        const Complex f = psi_k_paper(model, k, x);
        const Complex o = psi_k_oracle(model, k, x);
        out << format_g17(x) << "," << format_g17(f.real()) << "," << format_g17(f.imag())
            << "," << format_g17(o.real()) << "," << format_g17(o.imag()) << "\n";
    }
    const auto report = compare_formula_to_oracle(model, k, xs);
    std::cerr << "formula continuity defect: " << format_g17(report.formula_continuity_defect)
              << "\nformula jump defect: " << format_g17(report.formula_jump_defect)
              << "\noracle jump defect: " << format_g17(report.oracle_jump_defect)
              << "\nmax deviation after phase alignment: "
              << format_g17(report.max_deviation_after_phase) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-adjoint extensions and spectra of loop-chain quantum circuits"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "JSON configuration file");
        sub->add_option("--out", args.out_path, "output file (default: stdout)");
        sub->add_option("--k", args.k, "wavenumber");
        sub->add_option("--kmin", args.kmin, "scan start");
        sub->add_option("--kmax", args.kmax, "scan end");
        sub->add_option("--samples", args.samples, "scan sample count");
        sub->add_option("--m", args.m, "closed-chain cell count");
        sub->add_option("--cells", args.cells, "window cell count (window becomes [0, n-1])");
        sub->add_option("--points", args.points, "sample points per edge");
        sub->add_option("--alpha", args.alpha, "point-interaction coupling");
    };

    CLI::App* validate = app.add_subcommand("validate", "check a configuration and report");
    CLI::App* block = app.add_subcommand("block", "print the vertex unitary and its spectrum");
    CLI::App* invariance = app.add_subcommand("invariance", "solve or check the twist phases");
    CLI::App* band = app.add_subcommand("band", "transfer-matrix band scan");
    CLI::App* eigenfunction =
        app.add_subcommand("eigenfunction", "sample a generalized-eigenfunction candidate");
    CLI::App* closed = app.add_subcommand("closed", "discrete spectrum of the m-cell chain");
    CLI::App* pointint =
        app.add_subcommand("pointint", "point interaction on the line (reference model)");
    for (CLI::App* sub : {validate, block, invariance, band, eigenfunction, closed, pointint})
        add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (validate->parsed()) cmd_validate(args);
        else if (block->parsed()) cmd_block(args);
        else if (invariance->parsed()) cmd_invariance(args);
        else if (band->parsed()) cmd_band(args);
        else if (eigenfunction->parsed()) cmd_eigenfunction(args);
        else if (closed->parsed()) cmd_closed(args);
        else if (pointint->parsed()) cmd_pointint(args);
    } catch (const qgraph::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
