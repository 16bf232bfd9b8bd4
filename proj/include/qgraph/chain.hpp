#pragma once

#include "qgraph/core.hpp"
#include "qgraph/extensions.hpp"
#include "qgraph/metric_graph.hpp"
#include "qgraph/symmetry.hpp"

#include <map>
#include <vector>

namespace qgraph {

/// Loop-chain configuration: a window of degree-4 vertices, the two edge
/// lengths, and per-cell vertex conditions (a base rule plus overrides).
struct ChainConfig {
    CellRange window{0, 15};
    double l_u = 1.0;
    double l_v = 1.0;
    QuasiDeltaParams base{0.0, {0.0, 0.0, 0.0}};
    std::map<int, QuasiDeltaParams> overrides;

    const QuasiDeltaParams& params_at(int cell) const {
        auto it = overrides.find(cell);
        return it == overrides.end() ? base : it->second;
    }

    double alpha_gap(int cell) const {
        const auto& p = params_at(cell);
        return angle_distance(p.alphas[1] - p.alphas[0]);
    }

    std::vector<QuasiDeltaParams> per_cell() const {
        std::vector<QuasiDeltaParams> out;
        out.reserve(window.size());
        for (int i = window.first; i <= window.last; ++i) out.push_back(params_at(i));
        return out;
    }

    /// Constant delta and constant loop phase gap alpha_2 - alpha_1.
    bool is_z_invariant(double tol = 1e-9) const {
        for (int i = window.first; i <= window.last; ++i) {
            const auto& p = params_at(i);
            if (p.degree() != 4) return false;
            if (std::abs(angle_distance(p.delta - base_delta())) > tol) return false;
            if (std::abs(angle_distance(alpha_gap(i) - alpha_gap(window.first))) > tol)
                return false;
        }
        return true;
    }

    double base_delta() const { return params_at(window.first).delta; }

    void validate() const {
        require(window.size() >= 1, "empty window");
        require(l_u > 0.0 && l_v > 0.0, "edge lengths must be positive");
        for (int i = window.first; i <= window.last; ++i) {
            params_at(i).validate();
            require(params_at(i).degree() == 4, "chain vertices have degree 4");
        }
    }
};

/// Block unitary of the node conditions over the window, keyed by cell.
inline BlockUnitary chain_block_unitary(const ChainConfig& cfg) {
    BlockUnitary u;
    for (int i = cfg.window.first; i <= cfg.window.last; ++i)
        u.blocks[i] = node_condition_unitary(cfg.params_at(i));
    return u;
}

/// One row group of the node matching conditions at a cell, as a 4x6 system
/// over (A_i^u, B_i^u, A_i^v, B_i^v, A_{i+1}^u, B_{i+1}^u). Rows 0..2 equate
/// the chain trace to the phased loop and outgoing traces; row 3 is the
/// Robin-type derivative balance carrying 4 tan(delta/2).
using NodeSystem = Eigen::Matrix<Complex, 4, 6>;

inline NodeSystem assemble_node_system(const ChainConfig& cfg, int cell, double k) {
    require(k > 0.0, "wavenumber must be positive");
    require(cfg.window.contains(cell), "cell outside the window");
    const auto& p = cfg.params_at(cell);
    const Complex eu = unit_phase(k * cfg.l_u);
    const Complex ev = unit_phase(k * cfg.l_v);
    const Complex f1 = unit_phase(p.alphas[0]);
    const Complex f2 = unit_phase(p.alphas[1]);
    const Complex f3 = unit_phase(p.alphas[2]);

    NodeSystem s = NodeSystem::Zero();
    // common chain trace t = A_i^u e^{ik l_u} + B_i^u e^{-ik l_u}
    const Eigen::Matrix<Complex, 1, 6> t{eu, 1.0 / eu, 0, 0, 0, 0};
    s.row(0) = t - f1 * Eigen::Matrix<Complex, 1, 6>{0, 0, 1, 1, 0, 0};
    s.row(1) = t - f2 * Eigen::Matrix<Complex, 1, 6>{0, 0, ev, 1.0 / ev, 0, 0};
    s.row(2) = t - f3 * Eigen::Matrix<Complex, 1, 6>{0, 0, 0, 0, 1, 1};
    const Eigen::Matrix<Complex, 1, 6> deriv =
        Eigen::Matrix<Complex, 1, 6>{eu, -1.0 / eu, 0, 0, 0, 0} -
        f1 * Eigen::Matrix<Complex, 1, 6>{0, 0, 1, -1, 0, 0} +
        f2 * Eigen::Matrix<Complex, 1, 6>{0, 0, ev, -1.0 / ev, 0, 0} -
        f3 * Eigen::Matrix<Complex, 1, 6>{0, 0, 0, 0, 1, -1};
    s.row(3) = 4.0 * std::tan(p.delta / 2.0) * t - ci * k * deriv;
    return s;
}

/// Defect of one node's matching conditions for given coefficients (max norm).
inline double node_defect(const ChainConfig& cfg, int cell, double k,
                          const EdgeCoefficients& u_in, const EdgeCoefficients& loop,
                          const EdgeCoefficients& u_out) {
    const NodeSystem s = assemble_node_system(cfg, cell, k);
    Eigen::Matrix<Complex, 6, 1> x;
    x << u_in.A, u_in.B, loop.A, loop.B, u_out.A, u_out.B;
    return (s * x).cwiseAbs().maxCoeff();
}

/// 2x2 map propagating chain-edge coefficients across one cell.
struct TransferMatrix {
    Eigen::Matrix2cd m;
};

inline void require_nonresonant(const ChainConfig& cfg, double k) {
    if (distance_to_pi_multiple(k * cfg.l_v) < 1e-9)
        throw SingularElimination(
            "loop resonance: k*l_v is a multiple of pi, elimination is singular");
}

/// Loop coefficients implied by the chain trace through the first two node
/// conditions. Requires k*l_v away from multiples of pi.
inline EdgeCoefficients eliminate_loop(const ChainConfig& cfg, int cell, double k,
                                       const EdgeCoefficients& u_in) {
    require_nonresonant(cfg, k);
    const auto& p = cfg.params_at(cell);
    const Complex eu = unit_phase(k * cfg.l_u);
    const Complex ev = unit_phase(k * cfg.l_v);
    const Complex t = u_in.A * eu + u_in.B / eu;
    const Complex rhs1 = unit_phase(-p.alphas[0]) * t;
    const Complex rhs2 = unit_phase(-p.alphas[1]) * t;
    const Complex det = 1.0 / ev - ev;
    return {(rhs1 / ev - rhs2) / det, (rhs2 - rhs1 * ev) / det};
}

inline TransferMatrix transfer_matrix(const ChainConfig& cfg, int cell, double k) {
    require(k > 0.0, "wavenumber must be positive");
    require_nonresonant(cfg, k);
    const auto& p = cfg.params_at(cell);
    const Complex eu = unit_phase(k * cfg.l_u);
    const Complex ev = unit_phase(k * cfg.l_v);
    TransferMatrix out;
    for (int col = 0; col < 2; ++col) {
        const EdgeCoefficients u_in{col == 0 ? 1.0 : 0.0, col == 0 ? 0.0 : 1.0};
        const EdgeCoefficients loop = eliminate_loop(cfg, cell, k, u_in);
        const Complex t = u_in.A * eu + u_in.B / eu;
        const Complex deriv = u_in.A * eu - u_in.B / eu;
        const Complex sum = unit_phase(-p.alphas[2]) * t;
        const Complex diff =
            unit_phase(-p.alphas[2]) *
            (deriv - unit_phase(p.alphas[0]) * (loop.A - loop.B) +
             unit_phase(p.alphas[1]) * (loop.A * ev - loop.B / ev) -
             4.0 * std::tan(p.delta / 2.0) * t / (ci * k));
        out.m(0, col) = (sum + diff) / 2.0;
        out.m(1, col) = (sum - diff) / 2.0;
    }
    return out;
}

}  // namespace qgraph
