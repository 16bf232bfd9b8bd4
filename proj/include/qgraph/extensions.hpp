#pragma once

#include "qgraph/core.hpp"
#include "qgraph/metric_graph.hpp"

#include <algorithm>
#include <map>
#include <vector>

namespace qgraph {

/// Parameters of one vertex condition in the quasi-delta family: the phase
/// delta of the single eigenvalue different from -1 and the d-1 relative
/// phases alpha_1..alpha_{d-1} of its eigenvector.
struct QuasiDeltaParams {
    double delta = 0.0;
    std::vector<double> alphas;

    int degree() const { return static_cast<int>(alphas.size()) + 1; }

    void validate() const {
        require(degree() >= 2, "quasi-delta vertex needs degree >= 2");
        // delta = pi collapses the e^{i delta} eigenvalue into -1 (pure
        // Dirichlet block); that case is represented directly, not here.
        require(std::abs(angle_distance(delta - pi)) > 1e-12,
                "delta may not equal pi");
    }
};

struct ZetaVector {
    CVector components;
};

struct VertexUnitary {
    CMatrix matrix;

    int dim() const { return static_cast<int>(matrix.rows()); }
    double unitarity_defect() const {
        return (matrix.adjoint() * matrix - CMatrix::Identity(dim(), dim())).norm();
    }
};

/// Block-diagonal unitary on boundary data, one block per vertex id.
struct BlockUnitary {
    std::map<int, VertexUnitary> blocks;
};

/// (1, e^{i alpha_1}, ..., e^{i alpha_{d-1}})^T.
inline ZetaVector build_zeta(const QuasiDeltaParams& p) {
    CVector z(p.degree());
    z(0) = 1.0;
    for (int j = 0; j < static_cast<int>(p.alphas.size()); ++j)
        z(j + 1) = unit_phase(p.alphas[j]);
    return {z};
}

/// Rank-one orthogonal projector onto span{z}.
inline CMatrix rank_one_projector(const CVector& z) {
    return z * z.adjoint() / z.squaredNorm();
}

/// U = e^{i delta} P - (1 - P) with P the projector onto span{zeta}.
/// Eigenvalues are e^{i delta} (simple) and -1 (multiplicity d-1).
inline VertexUnitary build_quasi_delta_block(const QuasiDeltaParams& p) {
    p.validate();
    const CMatrix P = rank_one_projector(build_zeta(p).components);
    const int d = p.degree();
    return {unit_phase(p.delta) * P - (CMatrix::Identity(d, d) - P)};
}

inline QuasiDeltaParams negated(const QuasiDeltaParams& p) {
    QuasiDeltaParams q;
    q.delta = -p.delta;
    q.alphas.reserve(p.alphas.size());
    for (double a : p.alphas) q.alphas.push_back(-a);
    return q;
}

/// Vertex unitary whose boundary equation equates the trace at slot 0 to
/// e^{i alpha_j} times the trace at slot j and ties the twisted derivative
/// sum to +||zeta||^2 tan(delta/2) times the common trace value. This is the
/// conjugate of build_quasi_delta_block and is the block used for chain node
/// conditions; the two differ by (delta, alphas) -> (-delta, -alphas).
inline VertexUnitary node_condition_unitary(const QuasiDeltaParams& p) {
    return build_quasi_delta_block(negated(p));
}

namespace detail {

struct EigenCluster {
    double phase = 0.0;   // representative eigenvalue e^{i phase}
    CMatrix projector;    // orthogonal projector onto the cluster eigenspace
};

/// Eigendecomposition of a unitary with eigenvalues grouped into clusters of
/// radius tol; repeated eigenvalues get one orthonormalized projector each.
inline std::vector<EigenCluster> unitary_clusters(const CMatrix& U, double tol) {
    Eigen::ComplexEigenSolver<CMatrix> es(U);
    const CVector w = es.eigenvalues();
    const CMatrix V = es.eigenvectors();
    const int d = static_cast<int>(w.size());
    std::vector<int> cluster_of(d, -1);
    std::vector<std::vector<int>> members;
    for (int j = 0; j < d; ++j) {
        for (int c = 0; c < static_cast<int>(members.size()); ++c) {
            if (std::abs(w(j) - w(members[c][0])) <= tol) {
                cluster_of[j] = c;
                members[c].push_back(j);
                break;
            }
        }
        if (cluster_of[j] < 0) {
            cluster_of[j] = static_cast<int>(members.size());
            members.push_back({j});
        }
    }
    std::vector<EigenCluster> out;
    for (const auto& m : members) {
        CMatrix cols(d, m.size());
        for (int c = 0; c < static_cast<int>(m.size()); ++c) cols.col(c) = V.col(m[c]);
        Eigen::HouseholderQR<CMatrix> qr(cols);
        CMatrix Q = qr.householderQ() * CMatrix::Identity(d, static_cast<int>(m.size()));
        Complex mean = 0.0;
        for (int j : m) mean += w(j);
        mean /= static_cast<double>(m.size());
        out.push_back({std::arg(mean), Q * Q.adjoint()});
    }
    return out;
}

}  // namespace detail

struct CayleyOptions {
    double minus_one_tol = 1e-9;  // eigenvalues this close to -1 form ker(U+1)
    double ill_conditioned_tol = 1e-6;
};

/// Partial Cayley transform i P_perp (1-U)/(1+U), evaluated spectrally so the
/// exact -1 eigenspace is excised instead of inverted. On each remaining
/// eigenspace with eigenvalue e^{i psi} the transform acts as tan(psi/2).
inline CMatrix partial_cayley(const VertexUnitary& u, const CayleyOptions& opt = {}) {
    const auto clusters = detail::unitary_clusters(u.matrix, opt.minus_one_tol);
    CMatrix a = CMatrix::Zero(u.dim(), u.dim());
    for (const auto& c : clusters) {
        const double dist = std::abs(unit_phase(c.phase) - Complex(-1.0, 0.0));
        if (dist <= opt.minus_one_tol) continue;
        if (dist < opt.ill_conditioned_tol)
            throw IllConditionedGap(
                "eigenvalue within " + std::to_string(opt.ill_conditioned_tol) +
                " of -1: partial Cayley transform is ill conditioned");
        a += std::tan(c.phase / 2.0) * c.projector;
    }
    return (a + a.adjoint()) / 2.0;
}

struct BlockSpectrum {
    std::vector<Complex> eigenvalues;  // union over blocks, with multiplicity
    bool gap_at_minus_one = false;
    double margin = 0.0;  // min distance of non-(-1) eigenvalues to -1
};

/// Union of the block spectra plus a gap certificate at -1: the gap flag is
/// set when every eigenvalue not identified with -1 keeps distance > eps.
inline BlockSpectrum blockwise_spectrum(const BlockUnitary& u, double eps = 1e-6,
                                        double minus_one_tol = 1e-9) {
    BlockSpectrum s;
    double margin = 2.0;  // diameter of the unit circle
    for (const auto& [id, blk] : u.blocks) {
        Eigen::ComplexEigenSolver<CMatrix> es(blk.matrix, false);
        for (int j = 0; j < blk.dim(); ++j) {
            const Complex w = es.eigenvalues()(j);
            s.eigenvalues.push_back(w);
            const double dist = std::abs(w - Complex(-1.0, 0.0));
            if (dist > minus_one_tol) margin = std::min(margin, dist);
        }
    }
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    s.margin = margin;
    s.gap_at_minus_one = margin > eps;
    return s;
}

/// || (phi - i phidot) - U (phi + i phidot) || over the whole window.
inline double boundary_residual(const BlockUnitary& u, const TraceData& data) {
    require(data.phi.block_count() == static_cast<int>(u.blocks.size()),
            "block count mismatch between unitary and trace data");
    double sq = 0.0;
    int bi = 0;
    for (const auto& [id, blk] : u.blocks) {
        require(data.phi.block_dim(bi) == blk.dim(), "block dimension mismatch");
        const CVector phi = data.phi.block(bi);
        const CVector phidot = data.phidot.block(bi);
        sq += ((phi - ci * phidot) - blk.matrix * (phi + ci * phidot)).squaredNorm();
        ++bi;
    }
    return std::sqrt(sq);
}

/// || P phi || with P the orthogonal projector onto the -1 eigenspace.
inline double kernel_projection_condition(const VertexUnitary& u, const CVector& phi,
                                          double minus_one_tol = 1e-9) {
    const auto clusters = detail::unitary_clusters(u.matrix, minus_one_tol);
    CMatrix P = CMatrix::Zero(u.dim(), u.dim());
    for (const auto& c : clusters)
        if (std::abs(unit_phase(c.phase) - Complex(-1.0, 0.0)) <= minus_one_tol)
            P += c.projector;
    return (P * phi).norm();
}

}  // namespace qgraph
