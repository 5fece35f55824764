#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specgap/chain.hpp"
#include "specgap/common.hpp"
#include "specgap/rng.hpp"

namespace specgap {

struct GraphSpec {
    Eigen::Index num_vertices = 0;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges; // unordered pairs, multi-edges allowed
    int degree = 0;
    bool degenerate = false; // d = 2: the non-backtracking walk is deterministic
};

// Validates regularity; multi-edges are allowed, self-loops are not.
inline GraphSpec load_graph(Eigen::Index num_vertices,
                            std::vector<std::pair<Eigen::Index, Eigen::Index>> edges,
                            std::optional<int> expected_degree = std::nullopt) {
    if (num_vertices < 1) throw validation_error("load_graph: need at least one vertex");
    std::vector<int> deg(static_cast<std::size_t>(num_vertices), 0);
    for (const auto& [u, v] : edges) {
        if (u < 0 || v < 0 || u >= num_vertices || v >= num_vertices)
            throw validation_error("load_graph: edge endpoint out of range");
        if (u == v)
            throw validation_error("load_graph: self-loop at vertex " + std::to_string(u));
        ++deg[static_cast<std::size_t>(u)];
        ++deg[static_cast<std::size_t>(v)];
    }
    const int d = expected_degree ? *expected_degree : (num_vertices > 0 ? deg[0] : 0);
    std::string bad;
    for (Eigen::Index v = 0; v < num_vertices; ++v)
        if (deg[static_cast<std::size_t>(v)] != d)
            bad += (bad.empty() ? "" : ", ") + std::to_string(v) + " has degree " +
                   std::to_string(deg[static_cast<std::size_t>(v)]);
    if (!bad.empty())
        throw validation_error("load_graph: not " + std::to_string(d) + "-regular: " + bad);
    if (d < 1) throw validation_error("load_graph: need degree >= 1");
    GraphSpec g;
    g.num_vertices = num_vertices;
    g.edges = std::move(edges);
    g.degree = d;
    g.degenerate = (d == 2);
    return g;
}

// Normalized adjacency walk P = A/d on vertices; uniform stationary measure.
template <class S>
Chain<S> hecke_chain(const GraphSpec& g) {
    const Eigen::Index n = g.num_vertices;
    Chain<S> c;
    c.labels = default_labels(n);
    c.P = Mat<S>::Zero(n, n);
    for (const auto& [u, v] : g.edges) {
        c.P(u, v) += S(1);
        c.P(v, u) += S(1);
    }
    const S d = S(g.degree);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) c.P(i, j) /= d;
    c.m = Vec<S>::Constant(n, S(1) / S(static_cast<long long>(n)));
    return c;
}

template <class S>
struct DirectedEdgeChain {
    Chain<S> chain;      // states are directed edges (darts)
    Projection source;   // dart -> source vertex
    Projection terminal; // dart -> terminal vertex
    bool degenerate = false;
};

// Chain on the 2|E| directed edges: from (u,v) move to (v,w) for any dart
// leaving v other than the reversal of the same edge instance, uniformly
// over the d-1 choices. The uniform measure is stationary exactly.
template <class S>
DirectedEdgeChain<S> nonbacktracking_chain(const GraphSpec& g) {
    if (g.degree < 2) throw validation_error("nonbacktracking_chain: need degree >= 2");
    const Eigen::Index n_darts = 2 * static_cast<Eigen::Index>(g.edges.size());
    std::vector<Eigen::Index> src(static_cast<std::size_t>(n_darts)),
        dst(static_cast<std::size_t>(n_darts));
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        src[2 * e] = g.edges[e].first;
        dst[2 * e] = g.edges[e].second;
        src[2 * e + 1] = g.edges[e].second;
        dst[2 * e + 1] = g.edges[e].first;
    }
    std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(g.num_vertices));
    for (Eigen::Index a = 0; a < n_darts; ++a)
        out[static_cast<std::size_t>(src[static_cast<std::size_t>(a)])].push_back(a);

    DirectedEdgeChain<S> ec;
    ec.degenerate = g.degenerate;
    ec.chain.P = Mat<S>::Zero(n_darts, n_darts);
    const S w = S(1) / S(g.degree - 1);
    for (Eigen::Index a = 0; a < n_darts; ++a) {
        const Eigen::Index reverse = (a % 2 == 0) ? a + 1 : a - 1;
        for (Eigen::Index b : out[static_cast<std::size_t>(dst[static_cast<std::size_t>(a)])])
            if (b != reverse) ec.chain.P(a, b) = w;
    }
    ec.chain.labels.resize(static_cast<std::size_t>(n_darts));
    for (Eigen::Index a = 0; a < n_darts; ++a)
        ec.chain.labels[static_cast<std::size_t>(a)] =
            std::to_string(src[static_cast<std::size_t>(a)]) + "->" +
            std::to_string(dst[static_cast<std::size_t>(a)]);
    ec.chain.m = Vec<S>::Constant(n_darts, S(1) / S(static_cast<long long>(n_darts)));

    ec.source.map = src;
    ec.terminal.map = dst;
    ec.source.x_labels = default_labels(g.num_vertices);
    ec.terminal.x_labels = ec.source.x_labels;
    return ec;
}

// Configuration model with full rejection of self-loops and multi-edges;
// deterministic per seed (attempt index feeds the counter stream).
inline GraphSpec random_regular(Eigen::Index n, int d, std::uint64_t seed) {
    if (d < 1) throw validation_error("random_regular: need d >= 1");
    if (n <= d) throw validation_error("random_regular: need n > d");
    if ((n * d) % 2 != 0) throw validation_error("random_regular: n*d must be even");
    const Eigen::Index n_stubs = n * d;
    for (std::uint64_t attempt = 0; attempt < 100000; ++attempt) {
        std::vector<Eigen::Index> stubs(static_cast<std::size_t>(n_stubs));
        for (Eigen::Index i = 0; i < n_stubs; ++i) stubs[static_cast<std::size_t>(i)] = i / d;
        // Fisher-Yates driven by the counter generator.
        for (Eigen::Index i = n_stubs - 1; i > 0; --i) {
            const std::uint64_t u = draw_u64(seed, attempt, static_cast<std::uint64_t>(i));
            const Eigen::Index j = static_cast<Eigen::Index>(u % static_cast<std::uint64_t>(i + 1));
            std::swap(stubs[static_cast<std::size_t>(i)], stubs[static_cast<std::size_t>(j)]);
        }
        std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;
        edges.reserve(static_cast<std::size_t>(n_stubs / 2));
        std::vector<char> seen(static_cast<std::size_t>(n * n), 0);
        bool ok = true;
        for (Eigen::Index i = 0; i < n_stubs; i += 2) {
            Eigen::Index u = stubs[static_cast<std::size_t>(i)];
            Eigen::Index v = stubs[static_cast<std::size_t>(i + 1)];
            if (u == v) {
                ok = false;
                break;
            }
            if (u > v) std::swap(u, v);
            if (seen[static_cast<std::size_t>(u * n + v)]) {
                ok = false;
                break;
            }
            seen[static_cast<std::size_t>(u * n + v)] = 1;
            edges.emplace_back(u, v);
        }
        if (ok) return load_graph(n, std::move(edges), d);
    }
    throw certificate_error("random_regular: rejection cap exceeded (100000 attempts)");
}

inline GraphSpec complete_graph(Eigen::Index k) {
    if (k < 2) throw validation_error("complete_graph: need k >= 2");
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;
    for (Eigen::Index u = 0; u < k; ++u)
        for (Eigen::Index v = u + 1; v < k; ++v) edges.emplace_back(u, v);
    return load_graph(k, std::move(edges), static_cast<int>(k - 1));
}

inline GraphSpec cycle_graph(Eigen::Index n) {
    if (n < 3) throw validation_error("cycle_graph: need n >= 3");
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;
    for (Eigen::Index u = 0; u < n; ++u) edges.emplace_back(u, (u + 1) % n);
    return load_graph(n, std::move(edges), 2);
}

// Outer 5-cycle, inner pentagram, five spokes; the spoke edges are indices
// 10..14 (darts 20..29).
inline GraphSpec petersen_graph() {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges = {
        {0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0},  // outer cycle
        {5, 7}, {7, 9}, {9, 6}, {6, 8}, {8, 5},  // inner pentagram
        {0, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9}}; // spokes
    return load_graph(10, std::move(edges), 3);
}

} // namespace specgap
