#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cardbound/error.hpp"
#include "cardbound/query_catalog.hpp"
#include "cardbound/relation.hpp"

namespace cardbound {

using BigInt = boost::multiprecision::cpp_int;

// Undirected view of a symmetric relation over dense node indices. A pair
// (a, a) shows up as a in its own adjacency list.
class DataGraph {
public:
    static DataGraph from_relation(const Relation& rel) {
        if (!rel.symmetric()) throw DomainError("data graph needs a symmetric relation");
        DataGraph g;
        auto ids = rel.left_degree();
        g.ids_.reserve(ids.size());
        for (const auto& e : ids) g.ids_.push_back(e.id);
        g.adj_.resize(ids.size());
        auto index = [&g](NodeId v) {
            return static_cast<std::uint32_t>(std::lower_bound(g.ids_.begin(), g.ids_.end(), v) - g.ids_.begin());
        };
        for (const auto& [a, b] : rel.pairs()) {
            g.adj_[index(a)].push_back(index(b));
            if (a <= b) ++g.edges_;
        }
        // Pairs are sorted, so each adjacency list is already sorted.
        return g;
    }

    // Undirected edge list over nodes 0..n-1; duplicates are merged.
    static DataGraph from_edges(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
        DataGraph g;
        g.ids_.resize(n);
        for (std::size_t i = 0; i < n; ++i) g.ids_[i] = static_cast<NodeId>(i);
        g.adj_.resize(n);
        for (const auto& [a, b] : edges) {
            if (a >= n || b >= n) throw DomainError("edge endpoint out of range");
            g.adj_[a].push_back(b);
            if (a != b) g.adj_[b].push_back(a);
        }
        for (auto& l : g.adj_) {
            std::sort(l.begin(), l.end());
            l.erase(std::unique(l.begin(), l.end()), l.end());
        }
        for (std::size_t v = 0; v < n; ++v)
            for (auto w : g.adj_[v])
                if (v <= w) ++g.edges_;
        return g;
    }

    std::size_t node_count() const noexcept { return adj_.size(); }
    std::size_t edge_count() const noexcept { return edges_; }
    const std::vector<std::uint32_t>& neighbors(std::size_t v) const { return adj_[v]; }
    bool adjacent(std::size_t a, std::size_t b) const {
        return std::binary_search(adj_[a].begin(), adj_[a].end(), static_cast<std::uint32_t>(b));
    }
    NodeId id(std::size_t v) const { return ids_[v]; }

private:
    std::vector<NodeId> ids_;
    std::vector<std::vector<std::uint32_t>> adj_;
    std::size_t edges_ = 0;
};

namespace detail {

// Search plan: `prefix` vertices are enumerated in order (each after the first
// has an earlier neighbour); `leaves` form an independent set whose vertices only
// touch the prefix, so their images are counted by intersection size.
struct HomPlan {
    std::vector<int> prefix;
    std::vector<int> leaves;
    std::vector<std::vector<int>> back_neighbors;  // per vertex, neighbours placed earlier in prefix
};

inline HomPlan plan_homomorphism(const QueryGraph& q) {
    const int n = q.n;
    auto induced_connected = [&](std::uint32_t mask) {
        std::vector<QueryEdge> e;
        std::vector<int> map(static_cast<std::size_t>(n), -1);
        int k = 0;
        for (int v = 0; v < n; ++v)
            if (mask & (1u << v)) map[v] = k++;
        for (const auto& [u, v] : q.edges)
            if (map[u] >= 0 && map[v] >= 0) e.emplace_back(map[u], map[v]);
        return k > 0 && connected(k, e);
    };
    auto independent = [&](std::uint32_t mask) {
        for (const auto& [u, v] : q.edges)
            if ((mask & (1u << u)) && (mask & (1u << v))) return false;
        return true;
    };

    // Largest independent leaf set whose complement stays connected.
    const std::uint32_t all = (1u << n) - 1;
    std::uint32_t best_leaves = 0;
    int best_size = 0;
    for (std::uint32_t mask = 0; mask < all; ++mask) {
        const int size = std::popcount(mask);
        if (size <= best_size || !independent(mask) || !induced_connected(all & ~mask)) continue;
        best_leaves = mask;
        best_size = size;
    }

    std::vector<int> degree(static_cast<std::size_t>(n), 0);
    for (const auto& [u, v] : q.edges) {
        ++degree[u];
        ++degree[v];
    }
    HomPlan plan;
    plan.back_neighbors.resize(static_cast<std::size_t>(n));
    std::uint32_t placed = 0;
    const std::uint32_t prefix_mask = all & ~best_leaves;
    while (placed != prefix_mask) {
        int pick = -1, pick_links = -1;
        for (int v = 0; v < n; ++v) {
            if (!(prefix_mask & (1u << v)) || (placed & (1u << v))) continue;
            int links = 0;
            for (int w = 0; w < n; ++w)
                if ((placed & (1u << w)) && q.adjacent(v, w)) ++links;
            if (placed != 0 && links == 0) continue;
            if (links > pick_links || (links == pick_links && degree[v] > degree[pick])) {
                pick = v;
                pick_links = links;
            }
        }
        for (int w = 0; w < n; ++w)
            if ((placed & (1u << w)) && q.adjacent(pick, w)) plan.back_neighbors[pick].push_back(w);
        plan.prefix.push_back(pick);
        placed |= 1u << pick;
    }
    for (int v = 0; v < n; ++v) {
        if (!(best_leaves & (1u << v))) continue;
        for (int w = 0; w < n; ++w)
            if (q.adjacent(v, w)) plan.back_neighbors[v].push_back(w);
        plan.leaves.push_back(v);
    }
    return plan;
}

// Intersection of the neighbour lists of `images`, written to out.
inline void intersect_neighbors(const DataGraph& g, const std::vector<std::uint32_t>& images,
                                std::vector<std::uint32_t>& out) {
    std::size_t smallest = 0;
    for (std::size_t i = 1; i < images.size(); ++i)
        if (g.neighbors(images[i]).size() < g.neighbors(images[smallest]).size()) smallest = i;
    out.clear();
    for (auto c : g.neighbors(images[smallest])) {
        bool ok = true;
        for (std::size_t i = 0; i < images.size() && ok; ++i)
            if (i != smallest && !g.adjacent(images[i], c)) ok = false;
        if (ok) out.push_back(c);
    }
}

class HomCounter {
public:
    HomCounter(const QueryGraph& q, const DataGraph& g, std::uint64_t budget, std::atomic<std::uint64_t>& visits)
        : q_(q), g_(g), plan_(plan_homomorphism(q)), budget_(budget), visits_(visits),
          image_(static_cast<std::size_t>(q.n), 0), scratch_(static_cast<std::size_t>(q.n)) {}

    // Homomorphisms whose first prefix vertex maps to `root`; nullopt on budget exhaustion.
    std::optional<unsigned __int128> count_root(std::uint32_t root) {
        image_[plan_.prefix[0]] = root;
        unsigned __int128 total = 0;
        if (!extend(1, total)) return std::nullopt;
        return total;
    }

private:
    bool charge(std::uint64_t work) {
        return visits_.fetch_add(work, std::memory_order_relaxed) + work <= budget_;
    }

    bool extend(std::size_t depth, unsigned __int128& total) {
        if (!charge(1)) return false;
        if (depth == plan_.prefix.size()) {
            unsigned __int128 product = 1;
            for (int leaf : plan_.leaves) {
                const auto& back = plan_.back_neighbors[leaf];
                std::size_t count;
                if (back.size() == 1) {
                    count = g_.neighbors(image_[back[0]]).size();
                } else {
                    std::vector<std::uint32_t> imgs;
                    for (int w : back) imgs.push_back(image_[w]);
                    detail::intersect_neighbors(g_, imgs, scratch_[0]);
                    count = scratch_[0].size();
                }
                if (count == 0) return true;
                product *= count;
            }
            total += product;
            return true;
        }
        const int v = plan_.prefix[depth];
        std::vector<std::uint32_t> imgs;
        for (int w : plan_.back_neighbors[v]) imgs.push_back(image_[w]);
        auto& candidates = scratch_[depth];
        detail::intersect_neighbors(g_, imgs, candidates);
        if (!charge(candidates.size())) return false;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            image_[v] = candidates[i];
            if (!extend(depth + 1, total)) return false;
        }
        return true;
    }

    const QueryGraph& q_;
    const DataGraph& g_;
    HomPlan plan_;
    std::uint64_t budget_;
    std::atomic<std::uint64_t>& visits_;
    std::vector<std::uint32_t> image_;
    std::vector<std::vector<std::uint32_t>> scratch_;
};

inline BigInt to_big(unsigned __int128 v) {
    BigInt out = static_cast<std::uint64_t>(v >> 64);
    out <<= 64;
    out += static_cast<std::uint64_t>(v);
    return out;
}

}  // namespace detail

struct CountOptions {
    std::uint64_t budget = UINT64_MAX;  // search nodes plus candidates scanned
    unsigned threads = 1;
};

// Exact number of maps V(query) -> V(data) sending every query edge onto a data
// edge, or nullopt when the work budget runs out. Roots are partitioned across
// threads; the per-root counts are summed, so the total is order independent.
inline std::optional<BigInt> try_count_homomorphisms(const QueryGraph& query, const DataGraph& data,
                                                     const CountOptions& options = {}) {
    const std::size_t roots = data.node_count();
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(std::max<std::size_t>(roots, 1))));
    std::atomic<std::uint64_t> visits{0};
    std::vector<BigInt> partial(threads);
    std::vector<char> ok(threads, 1);

    auto work = [&](unsigned t) {
        detail::HomCounter counter(query, data, options.budget, visits);
        for (std::size_t r = t; r < roots; r += threads) {
            auto c = counter.count_root(static_cast<std::uint32_t>(r));
            if (!c) {
                ok[t] = 0;
                return;
            }
            partial[t] += detail::to_big(*c);
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    if (std::find(ok.begin(), ok.end(), 0) != ok.end()) return std::nullopt;
    BigInt total = 0;
    for (const auto& p : partial) total += p;
    return total;
}

inline BigInt count_homomorphisms(const QueryGraph& query, const DataGraph& data, unsigned threads = 1) {
    return *try_count_homomorphisms(query, data, {UINT64_MAX, threads});
}

// trace(A^k): closed walks of length k, equal to the number of homomorphisms
// from the k-cycle.
inline BigInt cycle_count_via_matrix(int k, const DataGraph& data, std::size_t max_nodes = 2000) {
    if (k < 3 || k > 5) throw DomainError("cycle length must be 3, 4 or 5");
    const std::size_t n = data.node_count();
    if (n > max_nodes) throw ResourceError("graph too large for dense matrix powers");

    // power = A^(k-1) built row by row from sparse A; trace(A^k) = sum_{ij} power_ij A_ji.
    using Wide = unsigned __int128;
    std::vector<Wide> power(n * n, 0), next(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (auto j : data.neighbors(i)) power[i * n + j] = 1;
    for (int step = 2; step < k; ++step) {
        std::fill(next.begin(), next.end(), Wide{0});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t m = 0; m < n; ++m) {
                const Wide v = power[i * n + m];
                if (v == 0) continue;
                for (auto j : data.neighbors(m)) next[i * n + j] += v;
            }
        std::swap(power, next);
    }
    Wide trace = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (auto j : data.neighbors(i)) trace += power[j * n + i];
    return detail::to_big(trace);
}

}  // namespace cardbound
