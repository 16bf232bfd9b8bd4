#pragma once

#include "qgraph/chain.hpp"
#include "qgraph/parallel.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <vector>

namespace qgraph {

/// Plane-wave coefficients of a generalized-eigenfunction candidate at fixed
/// wavenumber: chain edges over cells first..last+1, loops over first..last.
/// The stored residual is the max node-equation defect over the window.
struct EigenCandidate {
    double k = 0.0;
    CellRange window{0, 0};
    std::vector<EdgeCoefficients> u;  // size window.size() + 1
    std::vector<EdgeCoefficients> v;  // size window.size()
    double residual = 0.0;

    const EdgeCoefficients& u_at(int cell) const { return u.at(cell - window.first); }
    const EdgeCoefficients& v_at(int cell) const { return v.at(cell - window.first); }
    EdgeCoefficients& u_at(int cell) { return u.at(cell - window.first); }
    EdgeCoefficients& v_at(int cell) { return v.at(cell - window.first); }

    std::map<int, EdgeCoefficients> coefficient_map() const {
        std::map<int, EdgeCoefficients> m;
        for (int i = window.first; i <= window.last + 1; ++i) m[chain_u_edge_id(i)] = u_at(i);
        for (int i = window.first; i <= window.last; ++i) m[chain_v_edge_id(i)] = v_at(i);
        return m;
    }
};

inline double recompute_residual(const ChainConfig& cfg, const EigenCandidate& c) {
    double worst = 0.0;
    for (int i = c.window.first; i <= c.window.last; ++i)
        worst = std::max(worst, node_defect(cfg, i, c.k, c.u_at(i), c.v_at(i), c.u_at(i + 1)));
    return worst;
}

namespace detail {

/// Per-node least-squares step used at loop resonances, where the transfer
/// elimination is singular: solve the 4x6 system for the remaining four
/// coefficients with (A_i^u, B_i^u) held fixed.
inline void propagate_least_squares(const ChainConfig& cfg, int cell, double k,
                                    const EdgeCoefficients& u_in, EdgeCoefficients& loop,
                                    EdgeCoefficients& u_out) {
    const NodeSystem s = assemble_node_system(cfg, cell, k);
    Eigen::Matrix<Complex, 4, 4> lhs = s.rightCols<4>();
    Eigen::Matrix<Complex, 4, 1> rhs = -(s.leftCols<2>() * Eigen::Vector2cd(u_in.A, u_in.B));
    Eigen::Matrix<Complex, 4, 1> x =
        lhs.completeOrthogonalDecomposition().solve(rhs);
    loop = {x(0), x(1)};
    u_out = {x(2), x(3)};
}

inline Eigen::Vector2cd bloch_seed(const ChainConfig& cfg, double k, Complex multiplier,
                                   double unit_tol = 1e-8) {
    const TransferMatrix t = transfer_matrix(cfg, cfg.window.first, k);
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(t.m);
    int pick = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 2; ++j) {
        const Complex w = es.eigenvalues()(j);
        if (std::abs(std::abs(w) - 1.0) > unit_tol) continue;
        const double d = std::abs(w - multiplier);
        if (d < best) {
            best = d;
            pick = j;
        }
    }
    if (pick < 0)
        throw NotInBand("no unit-modulus transfer eigenvalue at this wavenumber");
    Eigen::Vector2cd seed = es.eigenvectors().col(pick);
    // deterministic phase: make the dominant component real positive
    const int dom = std::abs(seed(0)) >= std::abs(seed(1)) ? 0 : 1;
    seed *= std::abs(seed(dom)) / seed(dom);
    return seed;
}

}  // namespace detail

/// Propagate a seed across the window. With a Bloch multiplier supplied, the
/// seed argument is replaced by the matching transfer eigenvector so that
/// consecutive chain coefficients differ by that multiplier.
inline EigenCandidate build_candidate(const ChainConfig& cfg, double k,
                                      const EdgeCoefficients& seed,
                                      std::optional<Complex> bloch = std::nullopt) {
    require(k > 0.0, "wavenumber must be positive");
    cfg.validate();
    EigenCandidate c;
    c.k = k;
    c.window = cfg.window;
    c.u.resize(cfg.window.size() + 1);
    c.v.resize(cfg.window.size());

    EdgeCoefficients start = seed;
    if (bloch) {
        const Eigen::Vector2cd s = detail::bloch_seed(cfg, k, *bloch);
        start = {s(0), s(1)};
    }
    c.u_at(cfg.window.first) = start;

    const bool resonant = distance_to_pi_multiple(k * cfg.l_v) < 1e-9;
    for (int i = cfg.window.first; i <= cfg.window.last; ++i) {
        const EdgeCoefficients u_in = c.u_at(i);
        if (!resonant) {
            c.v_at(i) = eliminate_loop(cfg, i, k, u_in);
            const Eigen::Matrix2cd t = transfer_matrix(cfg, i, k).m;
            const Eigen::Vector2cd next = t * Eigen::Vector2cd(u_in.A, u_in.B);
            c.u_at(i + 1) = {next(0), next(1)};
        } else {
            detail::propagate_least_squares(cfg, i, k, u_in, c.v_at(i), c.u_at(i + 1));
        }
    }
    c.residual = recompute_residual(cfg, c);
    return c;
}

/// Translate a candidate one cell toward the window start, multiplying in the
/// twist phases. When the configuration passes the invariance check for this
/// theta, the result is again a candidate at the same wavenumber.
inline EigenCandidate translate_candidate(const ChainConfig& cfg, const EigenCandidate& c,
                                          const ThetaAssignment& theta) {
    require(theta.window.first == c.window.first && theta.window.last == c.window.last,
            "theta window must match the candidate window");
    require(c.window.size() >= 2, "candidate window too small to translate");
    EigenCandidate out;
    out.k = c.k;
    out.window = {c.window.first, c.window.last - 1};
    out.u.resize(out.window.size() + 1);
    out.v.resize(out.window.size());
    for (int j = out.window.first; j <= out.window.last + 1; ++j) {
        const Complex ph = unit_phase(-theta.u(j));
        out.u_at(j) = {ph * c.u_at(j + 1).A, ph * c.u_at(j + 1).B};
    }
    for (int j = out.window.first; j <= out.window.last; ++j) {
        const Complex ph = unit_phase(-theta.v(j + 1));
        out.v_at(j) = {ph * c.v_at(j + 1).A, ph * c.v_at(j + 1).B};
    }
    ChainConfig shrunk = cfg;
    shrunk.window = out.window;
    out.residual = recompute_residual(shrunk, out);
    return out;
}

struct BandSample {
    double k = 0.0;
    Complex lambda1;  // larger modulus first; ties broken by argument
    Complex lambda2;
    bool in_band = false;
};

inline std::array<Complex, 2> transfer_eigenvalues(const ChainConfig& cfg, double k) {
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(transfer_matrix(cfg, cfg.window.first, k).m,
                                                   false);
    Complex a = es.eigenvalues()(0);
    Complex b = es.eigenvalues()(1);
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma < mb || (ma == mb && std::arg(a) < std::arg(b))) std::swap(a, b);
    return {a, b};
}

/// Sample the transfer spectrum on a uniform grid; a wavenumber is in band
/// when some eigenvalue has modulus within 1e-8 of one. Samples falling on a
/// loop resonance are offset by half a grid step.
inline std::vector<BandSample> band_structure(const ChainConfig& cfg, double k_min,
                                              double k_max, int samples) {
    require(samples >= 2, "need at least two samples");
    require(k_min > 0.0 && k_max > k_min, "need 0 < k_min < k_max");
    const double step = (k_max - k_min) / (samples - 1);
    std::vector<BandSample> out(samples);
    parallel_for_index(static_cast<std::size_t>(samples), [&](std::size_t j) {
        double k = k_min + step * static_cast<double>(j);
        if (distance_to_pi_multiple(k * cfg.l_v) < 1e-9) k += 0.5 * step;
        const auto lam = transfer_eigenvalues(cfg, k);
        const bool in_band = std::abs(std::abs(lam[0]) - 1.0) < 1e-8 ||
                             std::abs(std::abs(lam[1]) - 1.0) < 1e-8;
        out[j] = {k, lam[0], lam[1], in_band};
    });
    return out;
}

/// Maximal k-intervals of a band scan containing no unit-modulus eigenvalue.
inline std::vector<std::pair<double, double>> band_gaps(const std::vector<BandSample>& scan) {
    std::vector<std::pair<double, double>> gaps;
    std::optional<double> open;
    for (const auto& s : scan) {
        if (!s.in_band && !open) open = s.k;
        if (s.in_band && open) {
            gaps.emplace_back(*open, s.k);
            open.reset();
        }
    }
    if (open) gaps.emplace_back(*open, scan.back().k);
    return gaps;
}

struct ClosedChainRoot {
    double k = 0.0;
    int n = 0;  // Bloch index: transfer eigenvalue e^{2 pi i n / m}
    double secular = 0.0;
    double residual = 0.0;     // node residual of the certified candidate
    double periodicity = 0.0;  // closure defect after m cells
};

struct ClosedChainResult {
    std::vector<ClosedChainRoot> roots;
    int refinements = 0;
    bool grid_warning = false;  // two roots remained within one grid step
};

namespace detail {

inline double secular_value(const ChainConfig& cfg, double k, Complex mu) {
    return std::abs(
        (transfer_matrix(cfg, cfg.window.first, k).m - mu * Eigen::Matrix2cd::Identity())
            .determinant());
}

inline double golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                              int iters = 120) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < iters && (b - a) > 1e-15; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return (fc < fd) ? c : d;
}

}  // namespace detail

/// Discrete spectrum (below k_max) of the m-cell periodic chain: wavenumbers
/// where the transfer matrix has eigenvalue e^{2 pi i n / m}. Grid scan with
/// golden-section refinement; every accepted root is certified by building
/// the periodic candidate and checking its node residual and m-cell closure.
/// Roots closer than one grid step trigger a rescan at doubled resolution
/// (up to four times) before being reported with a warning.
inline ClosedChainResult closed_chain_spectrum(const ChainConfig& cfg, int m, double k_max,
                                               int samples = 2000) {
    require(m >= 2, "need at least two cells in the closed chain");
    require(k_max > 0.0, "k_max must be positive");
    require(cfg.is_z_invariant(), "closed-chain spectra need a shift-invariant configuration");

    ClosedChainResult result;
    for (int attempt = 0; attempt <= 4; ++attempt) {
        const int n_samples = samples << attempt;
        result.roots.clear();
        result.refinements = attempt;
        result.grid_warning = false;
        const double step = k_max / n_samples;

        for (int n = 0; n < m; ++n) {
            const Complex mu = unit_phase(2.0 * pi * n / m);
            std::vector<double> ks(n_samples), fs(n_samples);
            parallel_for_index(static_cast<std::size_t>(n_samples), [&](std::size_t j) {
                double k = step * static_cast<double>(j + 1);
                if (distance_to_pi_multiple(k * cfg.l_v) < 1e-9) k += 0.5 * step;
                if (k > k_max) k -= step;
                ks[j] = k;
                fs[j] = detail::secular_value(cfg, k, mu);
            });
            for (int j = 1; j + 1 < n_samples; ++j) {
                if (!(fs[j] <= fs[j - 1] && fs[j] <= fs[j + 1])) continue;
                if (fs[j] > 1e-2) continue;  // reject shallow dips early
                const double k_star = detail::golden_minimize(
                    [&](double k) { return detail::secular_value(cfg, k, mu); }, ks[j - 1],
                    ks[j + 1]);
                const double f_star = detail::secular_value(cfg, k_star, mu);
                if (f_star >= 1e-8) continue;

                ChainConfig periodic = cfg;
                periodic.window = {0, m - 1};
                const EigenCandidate cand = build_candidate(periodic, k_star, {}, mu);
                const Eigen::Vector2cd first(cand.u_at(0).A, cand.u_at(0).B);
                const Eigen::Vector2cd wrapped(cand.u_at(m).A, cand.u_at(m).B);
                const double periodicity =
                    (wrapped - std::pow(mu, m) * first).norm() / std::max(first.norm(), 1e-300);
                result.roots.push_back({k_star, n, f_star, cand.residual, periodicity});
            }
        }
        std::sort(result.roots.begin(), result.roots.end(),
                  [](const ClosedChainRoot& a, const ClosedChainRoot& b) {
                      if (a.k != b.k) return a.k < b.k;
                      return a.n < b.n;
                  });
        bool too_close = false;
        for (std::size_t j = 1; j < result.roots.size(); ++j) {
            if (result.roots[j].n == result.roots[j - 1].n &&
                result.roots[j].k - result.roots[j - 1].k < step)
                too_close = true;
        }
        if (!too_close) return result;
        result.grid_warning = true;
    }
    return result;
}

struct SampleRow {
    int cell = 0;
    char kind = edge_kind::u;
    double x = 0.0;
    double re = 0.0;
    double im = 0.0;
    double abs = 0.0;
};

/// Evaluate the candidate on a uniform grid per edge, cells ascending, kind
/// 'u' before 'v', x ascending.
inline std::vector<SampleRow> sample_eigenfunction(const ChainConfig& cfg,
                                                   const EigenCandidate& c,
                                                   int points_per_edge) {
    require(points_per_edge >= 2, "need at least two sample points per edge");
    std::vector<SampleRow> rows;
    rows.reserve(static_cast<std::size_t>(c.window.size()) * 2 * points_per_edge);
    for (int i = c.window.first; i <= c.window.last; ++i) {
        for (char kind : {edge_kind::u, edge_kind::v}) {
            const double l = (kind == edge_kind::u) ? cfg.l_u : cfg.l_v;
            const EdgeCoefficients& ec = (kind == edge_kind::u) ? c.u_at(i) : c.v_at(i);
            for (int p = 0; p < points_per_edge; ++p) {
                const double x = l * p / (points_per_edge - 1);
                const Complex val = ec.A * unit_phase(c.k * x) + ec.B * unit_phase(-c.k * x);
                rows.push_back({i, kind, x, val.real(), val.imag(), std::abs(val)});
            }
        }
    }
    return rows;
}

/// Worst defect of the closed-form relations available when delta = 0: the
/// in/out envelope transport, the coefficient differences they imply, and the
/// direct expressions for the chain coefficients. All are per-cell identities.
inline double general_alpha_reduction_check(const ChainConfig& cfg, const EigenCandidate& c) {
    for (int i = c.window.first; i <= c.window.last; ++i)
        if (std::abs(cfg.params_at(i).delta) > 1e-12)
            throw std::domain_error(
                "closed-form reduction applies only at delta = 0; use the node residual");
    require(cfg.l_u == 1.0 && cfg.l_v == 1.0,
            "closed-form reduction is stated for unit edge lengths");

    const Complex e = unit_phase(c.k);
    double worst = 0.0;
    for (int i = c.window.first; i <= c.window.last; ++i) {
        const auto& p = cfg.params_at(i);
        const double alpha = p.alphas[1] - p.alphas[0];
        const Complex f1 = unit_phase(p.alphas[0]);
        const Complex f2 = unit_phase(p.alphas[1]);
        const Complex f3 = unit_phase(p.alphas[2]);
        const Complex a_u = c.u_at(i).A, b_u = c.u_at(i).B;
        const Complex a_v = c.v_at(i).A, b_v = c.v_at(i).B;
        const Complex a_next = c.u_at(i + 1).A, b_next = c.u_at(i + 1).B;

        const Complex a_out = a_v * f2 + a_u;
        const Complex b_out = b_v * f2 + b_u;
        const Complex a_in = a_v * f1 + a_next * f3;
        const Complex b_in = b_v * f1 + b_next * f3;

        worst = std::max(worst, std::abs(a_in - a_out * e));
        worst = std::max(worst, std::abs(b_in - b_out / e));
        worst = std::max(worst, std::abs(a_u - a_next * unit_phase(p.alphas[2] + alpha) -
                                         a_out * (1.0 - unit_phase(c.k + alpha))));
        worst = std::max(worst, std::abs(b_u - b_next * unit_phase(p.alphas[2] + alpha) -
                                         b_out * (1.0 - unit_phase(alpha - c.k))));
        worst = std::max(worst,
                         std::abs(a_u * (unit_phase(-alpha) + e) + b_u * (unit_phase(-alpha) + 1.0 / e) -
                                  (a_out + b_out) * unit_phase(-alpha)));
        worst = std::max(worst, std::abs(2.0 * a_u * (e * e - 1.0) -
                                         a_out * (e * e + unit_phase(c.k + alpha) - 2.0) -
                                         b_out * (unit_phase(-(c.k - alpha)) - 1.0)));
        worst = std::max(worst, std::abs(2.0 * b_u * (1.0 - 1.0 / (e * e)) -
                                         b_out * (2.0 - 1.0 / (e * e) - unit_phase(-(c.k - alpha))) -
                                         a_out * (1.0 - unit_phase(c.k + alpha))));
    }
    return worst;
}

}  // namespace qgraph
