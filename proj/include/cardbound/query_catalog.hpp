#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cardbound/error.hpp"

namespace cardbound {

using QueryEdge = std::pair<int, int>;

// A small simple connected graph used as a self-join template. Vertices
// 0..n-1 are the join attributes.
struct QueryGraph {
    int n = 0;
    std::vector<QueryEdge> edges;  // u < v, sorted
    std::string name;
    std::uint32_t canonical_code = 0;

    std::size_t edge_count() const noexcept { return edges.size(); }
    bool adjacent(int u, int v) const {
        if (u > v) std::swap(u, v);
        return std::binary_search(edges.begin(), edges.end(), QueryEdge{u, v});
    }
};

namespace detail {

inline constexpr int kMaxQueryVertices = 5;

// Bit index of pair (u, v), u < v, in the upper-triangle adjacency code.
constexpr int pair_bit(int u, int v, int n) {
    if (u > v) std::swap(u, v);
    return u * n - u * (u + 1) / 2 + (v - u - 1);
}

inline std::uint32_t adjacency_code(int n, const std::vector<QueryEdge>& edges, const std::array<int, 5>& perm) {
    std::uint32_t bits = 0;
    for (const auto& [u, v] : edges) bits |= 1u << pair_bit(perm[u], perm[v], n);
    return bits;
}

// Minimum adjacency code over all vertex relabelings, tagged with n.
inline std::uint32_t canonical_code(int n, const std::vector<QueryEdge>& edges) {
    std::array<int, 5> perm{0, 1, 2, 3, 4};
    std::uint32_t best = ~0u;
    do {
        best = std::min(best, adjacency_code(n, edges, perm));
    } while (std::next_permutation(perm.begin(), perm.begin() + n));
    return (static_cast<std::uint32_t>(n) << 16) | best;
}

inline bool connected(int n, const std::vector<QueryEdge>& edges) {
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    int components = n;
    for (const auto& [u, v] : edges) {
        int a = find(u), b = find(v);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components == 1;
}

inline std::vector<QueryEdge> normalize_edges(std::vector<QueryEdge> edges) {
    for (auto& [u, v] : edges)
        if (u > v) std::swap(u, v);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

// Complement of `edges` on n vertices.
inline std::vector<QueryEdge> complement(int n, const std::vector<QueryEdge>& edges) {
    std::vector<QueryEdge> out;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (!std::binary_search(edges.begin(), edges.end(), QueryEdge{u, v})) out.emplace_back(u, v);
    return out;
}

struct NamedShape {
    std::string_view name;
    int n;
    std::vector<QueryEdge> edges;
};

// Representative edge lists for the named shapes. Names ending in "c" are
// complements of the described disjoint unions (K3u2K1c: complement of K3 + 2K1).
inline const std::vector<NamedShape>& named_shapes() {
    static const std::vector<NamedShape> shapes = [] {
        std::vector<NamedShape> s = {
            {"path3", 3, {{0, 1}, {0, 2}}},
            {"K3", 3, {{0, 1}, {1, 2}, {0, 2}}},
            {"claw", 4, {{0, 1}, {0, 2}, {0, 3}}},
            {"path4", 4, {{0, 1}, {1, 2}, {2, 3}}},
            {"pan3", 4, {{1, 2}, {2, 3}, {1, 3}, {0, 3}}},
            {"cycle4", 4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}},
            {"fan2", 4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}}},
            {"K4", 4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}},
            {"K14", 5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}},
            {"chair", 5, {{1, 2}, {2, 3}, {3, 4}, {0, 2}}},
            {"path5", 5, {{3, 4}, {0, 4}, {0, 1}, {1, 2}}},
            {"cricket", 5, {{2, 3}, {0, 3}, {0, 2}, {0, 1}, {0, 4}}},
            {"pan4", 5, {{3, 4}, {0, 4}, {0, 1}, {1, 2}, {1, 3}}},
            {"bull", 5, {{3, 4}, {0, 4}, {0, 1}, {1, 2}, {1, 4}}},
            {"pan4c", 5, {{3, 4}, {0, 4}, {0, 1}, {1, 2}, {0, 3}}},
            {"cycle5", 5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}}},
            {"dart", 5, {{3, 4}, {0, 4}, {0, 1}, {1, 2}, {1, 4}, {2, 4}}},
            {"K23", 5, {{3, 4}, {0, 4}, {0, 1}, {1, 2}, {1, 3}, {2, 4}}},
            {"butterfly", 5, {{3, 4}, {0, 4}, {0, 1}, {1, 2}, {0, 2}, {0, 3}}},
            {"house", 5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {1, 4}}},
            {"kite", 5, {{3, 4}, {0, 4}, {0, 1}, {1, 2}, {0, 2}, {2, 4}}},
            {"K3u2K1c", 5, complement(5, {{0, 1}, {0, 2}, {1, 2}})},
            {"fan3", 5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {0, 2}, {0, 3}}},
            {"clawuK1c", 5, complement(5, {{0, 1}, {0, 2}, {0, 3}})},
            {"P2uP3c", 5, complement(5, {{0, 1}, {2, 3}, {3, 4}})},
            {"P3u2K1c", 5, complement(5, {{0, 1}, {1, 2}})},
            {"wheel4", 5, complement(5, {{0, 1}, {2, 3}})},
            {"K5_e", 5, complement(5, {{0, 1}})},
            {"K5", 5, complement(5, {})},
        };
        for (auto& shape : s) shape.edges = normalize_edges(std::move(shape.edges));
        return s;
    }();
    return shapes;
}

inline std::string name_for_code(int n, std::uint32_t code) {
    if (n == 1) return "K1";
    if (n == 2) return "K2";
    for (const auto& shape : named_shapes())
        if (shape.n == n && canonical_code(n, shape.edges) == code) return std::string(shape.name);
    return {};
}

}  // namespace detail

inline QueryGraph make_query_graph(int n, std::vector<QueryEdge> edges, std::string name = {}) {
    if (n < 1 || n > detail::kMaxQueryVertices) throw DomainError("query graphs have 1 to 5 vertices");
    edges = detail::normalize_edges(std::move(edges));
    for (const auto& [u, v] : edges)
        if (u < 0 || v >= n || u == v) throw DomainError("query edge out of range or a self-loop");
    if (!detail::connected(n, edges)) throw DomainError("query graph must be connected");
    QueryGraph g;
    g.n = n;
    g.canonical_code = detail::canonical_code(n, edges);
    g.edges = std::move(edges);
    g.name = name.empty() ? detail::name_for_code(n, g.canonical_code) : std::move(name);
    return g;
}

// One representative per isomorphism class of connected simple graphs on n
// vertices, ordered by edge count then canonical code.
inline std::vector<QueryGraph> enumerate_connected_graphs(int n) {
    if (n < 1 || n > detail::kMaxQueryVertices) throw DomainError("catalog covers 1 to 5 vertices");
    std::vector<QueryEdge> all;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) all.emplace_back(u, v);

    std::vector<std::uint32_t> seen;
    std::vector<QueryGraph> out;
    for (std::uint32_t mask = 0; mask < (1u << all.size()); ++mask) {
        std::vector<QueryEdge> edges;
        for (std::size_t i = 0; i < all.size(); ++i)
            if (mask & (1u << i)) edges.push_back(all[i]);
        if (!detail::connected(n, edges)) continue;
        const std::uint32_t code = detail::canonical_code(n, edges);
        if (std::find(seen.begin(), seen.end(), code) != seen.end()) continue;
        seen.push_back(code);
        out.push_back(make_query_graph(n, std::move(edges)));
    }
    std::sort(out.begin(), out.end(), [](const QueryGraph& a, const QueryGraph& b) {
        return std::pair(a.edge_count(), a.canonical_code) < std::pair(b.edge_count(), b.canonical_code);
    });
    return out;
}

// The 29 experiment queries on 3 to 5 vertices, in catalog order.
inline std::vector<QueryGraph> experiment_queries() {
    std::vector<QueryGraph> out;
    for (int n = 3; n <= 5; ++n)
        for (auto& g : enumerate_connected_graphs(n)) out.push_back(std::move(g));
    return out;
}

inline std::vector<std::string> query_names() {
    std::vector<std::string> names;
    for (const auto& shape : detail::named_shapes()) names.emplace_back(shape.name);
    return names;
}

inline QueryGraph lookup_named_query(std::string_view name) {
    for (const auto& shape : detail::named_shapes())
        if (shape.name == name) return make_query_graph(shape.n, shape.edges, std::string(shape.name));
    std::string valid;
    for (const auto& shape : detail::named_shapes()) {
        if (!valid.empty()) valid += ", ";
        valid += shape.name;
    }
    throw LookupError("unknown query '" + std::string(name) + "'; valid names: " + valid);
}

}  // namespace cardbound
