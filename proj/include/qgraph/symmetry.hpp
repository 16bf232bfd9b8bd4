#pragma once

#include "qgraph/core.hpp"
#include "qgraph/extensions.hpp"

#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace qgraph {

/// Phase twists of the shift representation: one angle per (cell, edge kind),
/// stored reduced to [0, 2*pi). Assignments differing by 2*pi compare equal.
struct ThetaAssignment {
    CellRange window;
    std::vector<double> theta_u;  // indexed by cell - window.first
    std::vector<double> theta_v;

    static ThetaAssignment zero(CellRange w) {
        return {w, std::vector<double>(w.size(), 0.0), std::vector<double>(w.size(), 0.0)};
    }

    double u(int cell) const { return theta_u.at(cell - window.first); }
    double v(int cell) const { return theta_v.at(cell - window.first); }

    void set_u(int cell, double a) { theta_u.at(cell - window.first) = wrap_angle(a); }
    void set_v(int cell, double a) { theta_v.at(cell - window.first) = wrap_angle(a); }

    bool equivalent(const ThetaAssignment& o, double tol = 1e-12) const {
        if (window.first != o.window.first || window.last != o.window.last) return false;
        for (int i = 0; i < window.size(); ++i) {
            if (std::abs(angle_distance(theta_u[i] - o.theta_u[i])) > tol) return false;
            if (std::abs(angle_distance(theta_v[i] - o.theta_v[i])) > tol) return false;
        }
        return true;
    }
};

/// Generator of the twisted shift acting on boundary data of the loop chain.
/// The block multiplying the node-i data (and producing node-(i+1) data) is
///     diag(e^{-i theta_i^u}, e^{-i theta_{i+1}^v},
///          e^{-i theta_{i+1}^v}, e^{-i theta_{i+1}^u}).
/// Chain-edge values carry the phase of their source cell; loop values carry
/// the phase of their destination cell, so both endpoints of every interval
/// pick up one common phase.
struct TraceRepElement {
    int k = 1;
    ThetaAssignment theta;

    /// Diagonal block applied to the node-`source_cell` data by the generator.
    Eigen::Matrix4cd generator_block(int source_cell) const {
        require(source_cell >= theta.window.first && source_cell + 1 <= theta.window.last,
                "generator block outside the window");
        Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
        m(0, 0) = unit_phase(-theta.u(source_cell));
        m(1, 1) = unit_phase(-theta.v(source_cell + 1));
        m(2, 2) = m(1, 1);
        m(3, 3) = unit_phase(-theta.u(source_cell + 1));
        return m;
    }

    /// Apply the represented group element to chain boundary data laid out as
    /// consecutive degree-4 vertex blocks over the window. Blocks whose source
    /// falls outside the window are set to zero.
    BoundaryVector apply(const BoundaryVector& data) const {
        BoundaryVector out = data;
        out.values.setZero();
        const int n = data.block_count();
        const int w0 = theta.window.first;
        const int step = k;
        for (int b = 0; b < n; ++b) {
            const int src = b - step;
            if (src < 0 || src >= n) continue;
            CVector blk = data.block(src);
            // accumulate generator phases along the path src -> b
            for (int s = 0; s < std::abs(step); ++s) {
                const int cell = w0 + (step > 0 ? src + s : src - s - 1);
                if (cell < theta.window.first || cell + 1 > theta.window.last) {
                    blk.setZero();
                    break;
                }
                const Eigen::Matrix4cd g = generator_block(cell);
                blk = (step > 0) ? (g * blk).eval() : (g.adjoint() * blk).eval();
            }
            out.block(b) = blk;
        }
        return out;
    }
};

/// True when every element of `reps` commutes with the block within `tol`.
inline bool is_local_symmetry(std::span<const CMatrix> reps, const VertexUnitary& u,
                              double tol) {
    for (const auto& g : reps) {
        require(g.rows() == u.dim() && g.cols() == u.dim(), "representation dimension mismatch");
        require((g.adjoint() * g - CMatrix::Identity(g.rows(), g.cols())).norm() < tol,
                "representation element is not unitary");
        if (spectral_norm(g * u.matrix - u.matrix * g) >= tol) return false;
    }
    return true;
}

/// Real dimension of the largest local symmetry group, U(d-1).
inline int local_symmetry_group_dimension(const QuasiDeltaParams& p) {
    const int d = p.degree();
    return (d - 1) * (d - 1);
}

/// Random element of the largest local symmetry group: in an orthonormal basis
/// adapted to zeta it acts as e^{i beta} on span{zeta} and as a Haar-like
/// unitary on the complement.
inline CMatrix random_local_symmetry(const QuasiDeltaParams& p, std::mt19937_64& rng) {
    const int d = p.degree();
    const CVector zeta = build_zeta(p).components;
    Eigen::HouseholderQR<CMatrix> frame(zeta);
    CMatrix basis = frame.householderQ();  // column 0 spans zeta up to phase
    std::normal_distribution<double> gauss;
    CMatrix ginibre(d - 1, d - 1);
    for (int r = 0; r < d - 1; ++r)
        for (int c = 0; c < d - 1; ++c) ginibre(r, c) = Complex(gauss(rng), gauss(rng));
    Eigen::HouseholderQR<CMatrix> qr(ginibre);
    CMatrix q = qr.householderQ();
    std::uniform_real_distribution<double> unif(0.0, 2.0 * pi);
    CMatrix core = CMatrix::Zero(d, d);
    core(0, 0) = unit_phase(unif(rng));
    core.block(1, 1, d - 1, d - 1) = q;
    return basis * core * basis.adjoint();
}

struct ConjugationResult {
    std::optional<QuasiDeltaParams> params;
    std::string failure;  // set when the conjugated block leaves the family

    explicit operator bool() const { return params.has_value(); }
};

/// Conjugate a quasi-delta block by V. Succeeds when V^* zeta has entries of
/// one common modulus; then V^* U V is the quasi-delta block with the same
/// delta and the rephased alphas.
inline ConjugationResult conjugate_quasi_delta(const CMatrix& v, const QuasiDeltaParams& p,
                                               double tol = 1e-10) {
    require(v.rows() == p.degree() && v.cols() == p.degree(), "conjugator dimension mismatch");
    require((v.adjoint() * v - CMatrix::Identity(v.rows(), v.cols())).norm() < tol,
            "conjugator is not unitary");
    const CVector image = v.adjoint() * build_zeta(p).components;
    const double mod0 = std::abs(image(0));
    for (int j = 1; j < image.size(); ++j)
        if (std::abs(std::abs(image(j)) - mod0) > tol)
            return {std::nullopt, "conjugated invariant vector is not entrywise unimodular"};

    QuasiDeltaParams out;
    out.delta = p.delta;
    out.alphas.resize(p.alphas.size());
    for (int j = 1; j < image.size(); ++j)
        out.alphas[j - 1] = std::arg(image(j) / image(0));

    const CMatrix expected = build_quasi_delta_block(out).matrix;
    const CMatrix conjugated = v.adjoint() * build_quasi_delta_block(p).matrix * v;
    if ((expected - conjugated).norm() >= tol)
        return {std::nullopt, "conjugated block does not match the rebuilt parameters"};
    return {out, {}};
}

/// Trace-representation generator for an explicit phase assignment.
inline TraceRepElement build_trace_generator(const ThetaAssignment& theta) {
    require(theta.window.size() >= 2, "window must hold at least two cells");
    return {1, theta};
}

namespace detail {

inline const QuasiDeltaParams& cell_params(std::span<const QuasiDeltaParams> per_cell,
                                           CellRange window, int cell) {
    return per_cell[cell - window.first];
}

}  // namespace detail

/// Max over interior cells of || g_{i-1}^* U_{i-1} g_{i-1} - U_i || with
/// g_{i-1} the generator block acting on node-(i-1) data and U_j the node
/// condition blocks. The extension is invariant under the twisted shift for
/// this theta iff the returned residual is below tolerance.
inline double check_z_invariance(std::span<const QuasiDeltaParams> per_cell,
                                 const ThetaAssignment& theta) {
    const CellRange w = theta.window;
    require(static_cast<int>(per_cell.size()) == w.size(),
            "per-cell parameters must cover the window");
    const TraceRepElement gen{1, theta};
    double worst = 0.0;
    for (int i = w.first + 1; i <= w.last; ++i) {
        const CMatrix u_prev = node_condition_unitary(detail::cell_params(per_cell, w, i - 1)).matrix;
        const CMatrix u_cur = node_condition_unitary(detail::cell_params(per_cell, w, i)).matrix;
        const Eigen::Matrix4cd g = gen.generator_block(i - 1);
        worst = std::max(worst, spectral_norm(g.adjoint() * u_prev * g - u_cur));
    }
    return worst;
}

struct ThetaSolution {
    std::optional<ThetaAssignment> theta;
    int obstruction_cell = 0;  // set on failure: the two loop constraints clash here

    explicit operator bool() const { return theta.has_value(); }
};

/// Solve for the twist phases making the chain invariant under the shift.
/// Requires a constant delta across the window. Fails exactly when the loop
/// phase gap alpha_1 - alpha_2 varies between neighbouring cells: both loop
/// endpoints would then demand different theta_i^v.
inline ThetaSolution solve_theta(std::span<const QuasiDeltaParams> per_cell, CellRange window,
                                 double tol = 1e-9) {
    require(static_cast<int>(per_cell.size()) == window.size(),
            "per-cell parameters must cover the window");
    require(window.size() >= 2, "window must hold at least two cells");
    for (const auto& p : per_cell) {
        p.validate();
        require(p.degree() == 4, "chain vertices have degree 4");
        require(std::abs(angle_distance(p.delta - per_cell[0].delta)) < tol,
                "delta must be constant across the window");
    }

    ThetaAssignment theta = ThetaAssignment::zero(window);
    double theta_u_prev = 0.0;  // gauge: theta_u = theta_v = 0 at the first cell
    for (int i = window.first + 1; i <= window.last; ++i) {
        const auto& prev = detail::cell_params(per_cell, window, i - 1);
        const auto& cur = detail::cell_params(per_cell, window, i);
        const double via_a1 = prev.alphas[0] - cur.alphas[0];
        const double via_a2 = prev.alphas[1] - cur.alphas[1];
        if (std::abs(angle_distance(via_a1 - via_a2)) > tol) return {std::nullopt, i};
        theta.set_v(i, theta_u_prev + via_a1);
        theta.set_u(i, theta_u_prev + prev.alphas[2] - cur.alphas[2]);
        theta_u_prev = theta.u(i);
    }
    return {theta, 0};
}

/// Best achievable single-cell invariance residual when theta_v and theta_u at
/// `cell` range over a uniform grid (the other phases solved beforehand).
/// Used to certify that a solve_theta failure is not a near-miss.
inline double theta_grid_search_residual(std::span<const QuasiDeltaParams> per_cell,
                                         CellRange window, int cell, int grid = 64) {
    require(cell > window.first && cell <= window.last, "cell must be interior");
    const auto& prev = detail::cell_params(per_cell, window, cell - 1);
    const auto& cur = detail::cell_params(per_cell, window, cell);
    const CMatrix u_prev = node_condition_unitary(prev).matrix;
    const CMatrix u_cur = node_condition_unitary(cur).matrix;

    // theta_u at cell-1 is a pure gauge for this block: fold it into the grid.
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < grid; ++a) {
        for (int b = 0; b < grid; ++b) {
            const double tv = 2.0 * pi * a / grid;
            const double tu = 2.0 * pi * b / grid;
            Eigen::Matrix4cd g = Eigen::Matrix4cd::Zero();
            g(0, 0) = 1.0;
            g(1, 1) = unit_phase(-tv);
            g(2, 2) = g(1, 1);
            g(3, 3) = unit_phase(-tu);
            best = std::min(best, spectral_norm(g.adjoint() * u_prev * g - u_cur));
        }
    }
    return best;
}

}  // namespace qgraph
