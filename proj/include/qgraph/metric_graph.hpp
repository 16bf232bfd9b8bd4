#pragma once

#include "qgraph/core.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace qgraph {

enum class EdgeEnd { left, right };  // left = x=0, right = x=length

namespace edge_kind {
inline constexpr char u = 'u';
inline constexpr char v = 'v';
}  // namespace edge_kind

struct EdgeSpec {
    int id = 0;
    char kind = edge_kind::u;
    double length = 1.0;
};

struct EndpointRef {
    int edge = 0;
    EdgeEnd end = EdgeEnd::left;

    friend bool operator==(const EndpointRef&, const EndpointRef&) = default;
};

/// A vertex is an ordered grouping of edge endpoints; the ordering fixes the
/// block layout of boundary-data vectors.
struct VertexSpec {
    int id = 0;
    std::vector<EndpointRef> endpoints;

    int degree() const { return static_cast<int>(endpoints.size()); }
};

/// Disjoint union of intervals glued at vertices. Windowed graphs may leave
/// border endpoints unattached; every endpoint belongs to at most one vertex.
struct MetricGraph {
    std::vector<EdgeSpec> edges;
    std::vector<VertexSpec> vertices;

    const EdgeSpec& edge(int id) const {
        for (const auto& e : edges)
            if (e.id == id) return e;
        throw std::invalid_argument("unknown edge id " + std::to_string(id));
    }

    /// (vertex index, slot within the vertex block), if the endpoint is attached.
    std::optional<std::pair<int, int>> endpoint_slot(int edge_id, EdgeEnd end) const {
        for (int vi = 0; vi < static_cast<int>(vertices.size()); ++vi) {
            const auto& eps = vertices[vi].endpoints;
            for (int s = 0; s < static_cast<int>(eps.size()); ++s)
                if (eps[s].edge == edge_id && eps[s].end == end) return {{vi, s}};
        }
        return std::nullopt;
    }

    int boundary_dimension() const {
        int d = 0;
        for (const auto& v : vertices) d += v.degree();
        return d;
    }

    /// Offset of each vertex block in a concatenated boundary vector
    /// (one extra trailing entry holding the total dimension).
    std::vector<int> block_offsets() const {
        std::vector<int> off;
        off.reserve(vertices.size() + 1);
        int o = 0;
        for (const auto& v : vertices) {
            off.push_back(o);
            o += v.degree();
        }
        off.push_back(o);
        return off;
    }

    void validate() const {
        std::map<int, int> edge_index;
        for (const auto& e : edges) {
            require(e.length > 0.0, "edge length must be positive");
            require(!edge_index.count(e.id), "duplicate edge id");
            edge_index[e.id] = 1;
        }
        std::map<std::pair<int, int>, int> seen;
        for (const auto& v : vertices) {
            require(v.degree() >= 1, "vertex of degree zero");
            for (const auto& ep : v.endpoints) {
                require(edge_index.count(ep.edge), "vertex references unknown edge");
                auto key = std::make_pair(ep.edge, ep.end == EdgeEnd::right ? 1 : 0);
                require(!seen.count(key), "endpoint attached to two vertices");
                seen[key] = v.id;
            }
        }
    }
};

/// Complex boundary data grouped in per-vertex blocks (threaded arrangement).
struct BoundaryVector {
    std::vector<int> offsets;  // as MetricGraph::block_offsets()
    CVector values;

    static BoundaryVector zero(const MetricGraph& g) {
        BoundaryVector b;
        b.offsets = g.block_offsets();
        b.values = CVector::Zero(g.boundary_dimension());
        return b;
    }

    int block_count() const { return static_cast<int>(offsets.size()) - 1; }
    int block_dim(int i) const { return offsets[i + 1] - offsets[i]; }

    Eigen::VectorBlock<CVector> block(int i) {
        return values.segment(offsets[i], block_dim(i));
    }
    Eigen::VectorBlock<const CVector> block(int i) const {
        return values.segment(offsets[i], block_dim(i));
    }
};

/// Function trace and outward-normal derivative trace. At a left endpoint the
/// stored normal derivative is -Phi'(0); at a right endpoint it is +Phi'(l).
struct TraceData {
    BoundaryVector phi;
    BoundaryVector phidot;
};

struct EdgeCoefficients {
    Complex A{0.0, 0.0};
    Complex B{0.0, 0.0};
};

inline int chain_u_edge_id(int cell) { return 2 * cell; }
inline int chain_v_edge_id(int cell) { return 2 * cell + 1; }

/// Windowed chain with a loop at every node. Vertex i groups, in order, the
/// right end of the incoming chain edge, both ends of the loop, and the left
/// end of the outgoing chain edge. Chain edges exist for cells
/// first..last+1; their outermost ends dangle at the window border.
inline MetricGraph build_chain_graph(CellRange cells, double l_u, double l_v) {
    require(cells.size() >= 1, "empty cell range");
    require(l_u > 0.0 && l_v > 0.0, "edge lengths must be positive");

    MetricGraph g;
    for (int i = cells.first; i <= cells.last + 1; ++i)
        g.edges.push_back({chain_u_edge_id(i), edge_kind::u, l_u});
    for (int i = cells.first; i <= cells.last; ++i)
        g.edges.push_back({chain_v_edge_id(i), edge_kind::v, l_v});
    for (int i = cells.first; i <= cells.last; ++i) {
        VertexSpec v;
        v.id = i;
        v.endpoints = {{chain_u_edge_id(i), EdgeEnd::right},
                       {chain_v_edge_id(i), EdgeEnd::left},
                       {chain_v_edge_id(i), EdgeEnd::right},
                       {chain_u_edge_id(i + 1), EdgeEnd::left}};
        g.vertices.push_back(std::move(v));
    }
    g.validate();
    return g;
}

/// Boundary data of the plane wave A e^{ikx} + B e^{-ikx} on every edge.
inline TraceData trace_of_plane_wave(const MetricGraph& g, double k,
                                     const std::map<int, EdgeCoefficients>& coeffs) {
    require(k > 0.0, "wavenumber must be positive");
    TraceData t{BoundaryVector::zero(g), BoundaryVector::zero(g)};
    for (int vi = 0; vi < static_cast<int>(g.vertices.size()); ++vi) {
        const auto& vx = g.vertices[vi];
        for (int s = 0; s < vx.degree(); ++s) {
            const auto& ep = vx.endpoints[s];
            auto it = coeffs.find(ep.edge);
            require(it != coeffs.end(),
                    "missing coefficients for edge " + std::to_string(ep.edge));
            const auto& [A, B] = it->second;
            const double l = g.edge(ep.edge).length;
            const int idx = t.phi.offsets[vi] + s;
            if (ep.end == EdgeEnd::left) {
                t.phi.values(idx) = A + B;
                t.phidot.values(idx) = -ci * k * (A - B);
            } else {
                const Complex e = unit_phase(k * l);
                t.phi.values(idx) = A * e + B / e;
                t.phidot.values(idx) = ci * k * (A * e - B / e);
            }
        }
    }
    return t;
}

}  // namespace qgraph
