#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dcnet/error.hpp"
#include "dcnet/sparse_matrix.hpp"

namespace dcnet {

/// Oriented edge between 0-based nodes. Normalized edges satisfy from > to.
struct Edge {
    std::size_t from;
    std::size_t to;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline std::string describe(const Edge& e) {
    // Reported 1-based, the convention of every file format.
    return "(" + std::to_string(e.from + 1) + ", " + std::to_string(e.to + 1) + ")";
}

/// The physical network blueprint: n nodes, m oriented edges and the set of
/// generator nodes. Indices are 0-based in memory and 1-based on disk.
struct NetworkTopology {
    std::string name;
    std::size_t n = 0;
    std::vector<Edge> edges;
    std::vector<bool> generator;

    std::size_t m() const noexcept { return edges.size(); }

    std::size_t generator_count() const {
        return static_cast<std::size_t>(std::count(generator.begin(), generator.end(), true));
    }

    std::vector<std::size_t> generator_nodes() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < generator.size(); ++i) {
            if (generator[i]) out.push_back(i);
        }
        return out;
    }

    /// Dimension of the closed-loop state, 4n + m.
    std::size_t state_dimension() const noexcept { return 4 * n + edges.size(); }

    friend bool operator==(const NetworkTopology&, const NetworkTopology&) = default;
};

/// Communication links among generators with their positive gains.
struct CommunicationGraph {
    std::vector<Edge> edges;
    std::vector<double> weights;

    std::size_t size() const noexcept { return edges.size(); }

    friend bool operator==(const CommunicationGraph&, const CommunicationGraph&) = default;
};

/// Throws ValidationError naming the first offending edge.
inline void validate(const NetworkTopology& t) {
    if (t.n == 0) throw ValidationError("topology '" + t.name + "' has no nodes");
    if (t.generator.size() != t.n) {
        throw ValidationError("topology '" + t.name + "': generator flag vector has length " +
                              std::to_string(t.generator.size()) + ", expected " +
                              std::to_string(t.n));
    }
    for (std::size_t e = 0; e < t.edges.size(); ++e) {
        const Edge& edge = t.edges[e];
        if (edge.from >= t.n || edge.to >= t.n) {
            throw ValidationError("edge " + std::to_string(e + 1) + " " + describe(edge) +
                                  " has a node outside [1, " + std::to_string(t.n) + "]");
        }
        if (edge.from == edge.to) {
            throw ValidationError("edge " + std::to_string(e + 1) + " " + describe(edge) +
                                  " is a self-loop");
        }
        if (edge.from < edge.to) {
            throw ValidationError("edge " + std::to_string(e + 1) + " " + describe(edge) +
                                  " violates the orientation i > j");
        }
    }
}

/// Number of connected components (isolated nodes count as components).
inline std::size_t connected_components(std::size_t n, std::span<const Edge> edges) {
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    std::size_t components = n;
    for (const Edge& e : edges) {
        const std::size_t a = find(e.from);
        const std::size_t b = find(e.to);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components;
}

/// Non-fatal findings about a valid topology: parallel edges and
/// disconnected graphs are accepted but reported.
inline std::vector<std::string> topology_warnings(const NetworkTopology& t) {
    std::vector<std::string> warnings;
    std::set<Edge> seen;
    std::size_t parallel = 0;
    for (const Edge& e : t.edges) {
        if (!seen.insert(e).second) ++parallel;
    }
    if (parallel > 0) {
        warnings.push_back(std::to_string(parallel) +
                           " parallel edge(s) kept as separate lines");
    }
    const std::size_t comps = connected_components(t.n, t.edges);
    if (comps > 1) {
        warnings.push_back("graph is disconnected (" + std::to_string(comps) + " components)");
    }
    return warnings;
}

/// Builds a validated topology from 0-based node pairs in any orientation.
/// Pairs listed as (j, i) with j < i are flipped; the number of flips is
/// reported through `warnings` when given.
inline NetworkTopology make_topology(std::string name, std::size_t n,
                                     std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                     std::span<const std::size_t> generators,
                                     std::vector<std::string>* warnings = nullptr) {
    NetworkTopology t;
    t.name = std::move(name);
    t.n = n;
    t.generator.assign(n, false);
    std::size_t flipped = 0;
    t.edges.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        if (a < b) ++flipped;
        t.edges.push_back({std::max(a, b), std::min(a, b)});
    }
    for (std::size_t g : generators) {
        if (g >= n) {
            throw ValidationError("generator node " + std::to_string(g + 1) + " outside [1, " +
                                  std::to_string(n) + "]");
        }
        t.generator[g] = true;
    }
    validate(t);
    if (warnings) {
        if (flipped > 0) {
            warnings->push_back(std::to_string(flipped) + " edge(s) reoriented to i > j");
        }
        auto more = topology_warnings(t);
        warnings->insert(warnings->end(), more.begin(), more.end());
    }
    return t;
}

/// Oriented node-edge incidence matrix over n nodes: column e of edge (i, j)
/// holds +1 in row i and -1 in row j.
inline CsrMatrix<double> incidence_matrix(std::size_t n, std::span<const Edge> edges) {
    std::vector<Triplet<double>> trip;
    trip.reserve(2 * edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const Edge& edge = edges[e];
        if (edge.from >= n || edge.to >= n || edge.from == edge.to) {
            throw ValidationError("malformed edge " + std::to_string(e + 1) + " " + describe(edge));
        }
        trip.push_back({edge.from, e, 1.0});
        trip.push_back({edge.to, e, -1.0});
    }
    return CsrMatrix<double>::from_triplets(n, edges.size(), std::move(trip));
}

inline CsrMatrix<double> incidence_matrix(const NetworkTopology& t) {
    validate(t);
    return incidence_matrix(t.n, t.edges);
}

/// L_W = B diag(w) B^T, accumulated column by column of B.
inline CsrMatrix<double> weighted_laplacian(const CsrMatrix<double>& b, std::span<const double> w) {
    if (w.size() != b.cols()) {
        throw ValidationError("weight vector has length " + std::to_string(w.size()) +
                              ", incidence matrix has " + std::to_string(b.cols()) + " columns");
    }
    for (std::size_t e = 0; e < w.size(); ++e) {
        if (!(w[e] > 0.0)) {
            throw ValidationError("weight " + std::to_string(e + 1) + " is not strictly positive");
        }
    }
    const CsrMatrix<double> bt = b.transpose();
    const auto off = bt.row_offsets();
    const auto rows = bt.col_indices();
    const auto val = bt.values();
    std::vector<Triplet<double>> trip;
    for (std::size_t e = 0; e < bt.rows(); ++e) {
        for (std::size_t p = off[e]; p < off[e + 1]; ++p) {
            for (std::size_t q = off[e]; q < off[e + 1]; ++q) {
                trip.push_back({rows[p], rows[q], val[p] * w[e] * val[q]});
            }
        }
    }
    return CsrMatrix<double>::from_triplets(b.rows(), b.rows(), std::move(trip));
}

/// Nearest-neighbour ring over the generator nodes in ascending order.
/// Two generators give a single link, fewer give none.
inline CommunicationGraph ring_communication(const NetworkTopology& t, double gamma) {
    if (!(gamma > 0.0)) throw ValidationError("communication gain must be strictly positive");
    const std::vector<std::size_t> g = t.generator_nodes();
    CommunicationGraph com;
    if (g.size() >= 2) {
        for (std::size_t k = 1; k < g.size(); ++k) com.edges.push_back({g[k], g[k - 1]});
        if (g.size() >= 3) com.edges.push_back({g.back(), g.front()});
    }
    com.weights.assign(com.edges.size(), gamma);
    return com;
}

inline void validate(const CommunicationGraph& com, const NetworkTopology& t) {
    if (com.weights.size() != com.edges.size()) {
        throw ValidationError("communication graph has " + std::to_string(com.edges.size()) +
                              " edges but " + std::to_string(com.weights.size()) + " weights");
    }
    for (std::size_t e = 0; e < com.edges.size(); ++e) {
        const Edge& edge = com.edges[e];
        if (edge.from >= t.n || edge.to >= t.n || edge.from <= edge.to) {
            throw ValidationError("communication edge " + describe(edge) + " is malformed");
        }
        if (!t.generator[edge.from] || !t.generator[edge.to]) {
            throw ValidationError("communication edge " + describe(edge) +
                                  " touches a non-generator node");
        }
        if (!(com.weights[e] > 0.0)) {
            throw ValidationError("communication weight on " + describe(edge) +
                                  " is not strictly positive");
        }
    }
}

/// n x n weighted Laplacian of the communication graph (zero when empty).
inline CsrMatrix<double> communication_laplacian(std::size_t n, const CommunicationGraph& com) {
    return weighted_laplacian(incidence_matrix(n, com.edges), com.weights);
}

}  // namespace dcnet
