#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cardbound/error.hpp"

namespace cardbound {

using NodeId = std::int64_t;
using Pair = std::pair<NodeId, NodeId>;

struct DegreeEntry {
    NodeId id;
    std::uint64_t degree;
    friend bool operator==(const DegreeEntry&, const DegreeEntry&) = default;
};

// Number of nodes on one side with a given degree.
struct DegreeCount {
    std::uint64_t degree;
    std::uint64_t nodes;
    friend bool operator==(const DegreeCount&, const DegreeCount&) = default;
};

// Number of pairs (a, b) with deg(a) = left and deg(b) = right.
struct BidegreeCount {
    std::uint64_t left;
    std::uint64_t right;
    std::uint64_t pairs;
    friend bool operator==(const BidegreeCount&, const BidegreeCount&) = default;
};

enum class Side { left, right };

struct ParseOptions {
    bool symmetrize = false;
    bool drop_self_loops = false;
};

// An immutable binary relation R(A, B): a set of distinct pairs together with
// its left/right degree maps and the bi-degree histogram.
//
// Node ids are arbitrary 64-bit values. Degrees are computed over dense
// indices; the public maps are sorted by node id.
class Relation {
public:
    // Deduplicates; throws EmptyRelation when nothing remains.
    static Relation from_pairs(std::vector<Pair> pairs) {
        if (pairs.empty()) throw EmptyRelation();
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
        return Relation(std::move(pairs));
    }

    std::span<const Pair> pairs() const noexcept { return pairs_; }
    std::size_t size() const noexcept { return pairs_.size(); }

    std::span<const DegreeEntry> left_degree() const noexcept { return left_; }
    std::span<const DegreeEntry> right_degree() const noexcept { return right_; }
    std::span<const DegreeEntry> degree(Side side) const noexcept {
        return side == Side::left ? left_degree() : right_degree();
    }

    // 0 when the id does not occur on that side.
    std::uint64_t degree_of(Side side, NodeId id) const {
        auto entries = degree(side);
        auto it = std::lower_bound(entries.begin(), entries.end(), id,
                                   [](const DegreeEntry& e, NodeId v) { return e.id < v; });
        return (it != entries.end() && it->id == id) ? it->degree : 0;
    }

    std::span<const DegreeCount> degree_histogram(Side side) const noexcept {
        return side == Side::left ? left_hist_ : right_hist_;
    }
    std::span<const BidegreeCount> bidegree_histogram() const noexcept { return bidegree_; }

    std::uint64_t max_degree(Side side) const noexcept {
        auto h = degree_histogram(side);
        return h.back().degree;
    }
    std::size_t support_size(Side side) const noexcept { return degree(side).size(); }

    bool symmetric() const noexcept { return symmetric_; }

    // FNV-1a over the sorted pair list; stable across runs and platforms.
    std::uint64_t digest() const noexcept {
        std::uint64_t h = 14695981039346656037ULL;
        auto mix = [&h](std::uint64_t v) {
            for (int i = 0; i < 8; ++i) {
                h ^= (v >> (8 * i)) & 0xffU;
                h *= 1099511628211ULL;
            }
        };
        mix(pairs_.size());
        for (const auto& [a, b] : pairs_) {
            mix(static_cast<std::uint64_t>(a));
            mix(static_cast<std::uint64_t>(b));
        }
        return h;
    }

    friend bool operator==(const Relation& x, const Relation& y) { return x.pairs_ == y.pairs_; }

private:
    explicit Relation(std::vector<Pair> sorted_unique) : pairs_(std::move(sorted_unique)) { index(); }

    void index() {
        const std::size_t m = pairs_.size();

        // Dense remap of each column.
        std::vector<NodeId> left_ids, right_ids;
        left_ids.reserve(m);
        right_ids.reserve(m);
        for (const auto& [a, b] : pairs_) {
            left_ids.push_back(a);
            right_ids.push_back(b);
        }
        auto compact = [](std::vector<NodeId>& ids) {
            std::sort(ids.begin(), ids.end());
            ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        };
        compact(left_ids);
        compact(right_ids);
        auto dense = [](const std::vector<NodeId>& ids, NodeId v) {
            return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), v) - ids.begin());
        };

        std::vector<std::uint32_t> left_idx(m), right_idx(m);
        std::vector<std::uint64_t> left_deg(left_ids.size(), 0), right_deg(right_ids.size(), 0);
        for (std::size_t i = 0; i < m; ++i) {
            // Pairs are sorted by left id, so left indices are nondecreasing.
            left_idx[i] = static_cast<std::uint32_t>(dense(left_ids, pairs_[i].first));
            right_idx[i] = static_cast<std::uint32_t>(dense(right_ids, pairs_[i].second));
            ++left_deg[left_idx[i]];
            ++right_deg[right_idx[i]];
        }

        left_.resize(left_ids.size());
        for (std::size_t i = 0; i < left_ids.size(); ++i) left_[i] = {left_ids[i], left_deg[i]};
        right_.resize(right_ids.size());
        for (std::size_t i = 0; i < right_ids.size(); ++i) right_[i] = {right_ids[i], right_deg[i]};

        left_hist_ = histogram(left_deg);
        right_hist_ = histogram(right_deg);

        std::vector<std::pair<std::uint64_t, std::uint64_t>> bideg(m);
        for (std::size_t i = 0; i < m; ++i) bideg[i] = {left_deg[left_idx[i]], right_deg[right_idx[i]]};
        std::sort(bideg.begin(), bideg.end());
        for (std::size_t i = 0; i < m;) {
            std::size_t j = i;
            while (j < m && bideg[j] == bideg[i]) ++j;
            bidegree_.push_back({bideg[i].first, bideg[i].second, j - i});
            i = j;
        }

        if (left_ids == right_ids) {
            std::vector<Pair> transposed(pairs_.size());
            std::transform(pairs_.begin(), pairs_.end(), transposed.begin(),
                           [](const Pair& p) { return Pair{p.second, p.first}; });
            std::sort(transposed.begin(), transposed.end());
            symmetric_ = transposed == pairs_;
        }
    }

    static std::vector<DegreeCount> histogram(std::vector<std::uint64_t> degrees) {
        std::sort(degrees.begin(), degrees.end());
        std::vector<DegreeCount> out;
        for (std::size_t i = 0; i < degrees.size();) {
            std::size_t j = i;
            while (j < degrees.size() && degrees[j] == degrees[i]) ++j;
            out.push_back({degrees[i], j - i});
            i = j;
        }
        return out;
    }

    std::vector<Pair> pairs_;
    std::vector<DegreeEntry> left_;
    std::vector<DegreeEntry> right_;
    std::vector<DegreeCount> left_hist_;
    std::vector<DegreeCount> right_hist_;
    std::vector<BidegreeCount> bidegree_;
    bool symmetric_ = false;
};

inline Relation relation_from_pairs(std::vector<Pair> pairs) { return Relation::from_pairs(std::move(pairs)); }

// Union with the transpose.
inline Relation symmetrize(const Relation& rel) {
    if (rel.symmetric()) return rel;
    std::vector<Pair> pairs;
    pairs.reserve(2 * rel.size());
    for (const auto& [a, b] : rel.pairs()) {
        pairs.emplace_back(a, b);
        pairs.emplace_back(b, a);
    }
    return Relation::from_pairs(std::move(pairs));
}

namespace detail {

inline bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

// Splits a line into whitespace-separated tokens (at most three are kept).
inline std::size_t tokenize(std::string_view line, std::string_view (&tokens)[3]) {
    std::size_t count = 0, i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_blank(line[i])) ++i;
        if (i == line.size()) break;
        std::size_t j = i;
        while (j < line.size() && !is_blank(line[j])) ++j;
        if (count < 3) tokens[count] = line.substr(i, j - i);
        ++count;
        i = j;
    }
    return count;
}

inline NodeId parse_id(std::string_view token, std::size_t line_no) {
    NodeId v{};
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw ParseError(line_no, "expected an integer node id, got '" + std::string(token) + "'");
    return v;
}

}  // namespace detail

// Reads a SNAP-style edge list: two integer ids per line, '#' comments.
inline Relation parse_edge_list(std::istream& input, const ParseOptions& options = {}) {
    std::vector<Pair> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        std::string_view view(line);
        std::size_t first = 0;
        while (first < view.size() && detail::is_blank(view[first])) ++first;
        if (first == view.size() || view[first] == '#') continue;

        std::string_view tokens[3];
        const std::size_t n = detail::tokenize(view, tokens);
        if (n != 2)
            throw ParseError(line_no, "expected 2 fields, got " + std::to_string(n));
        const NodeId a = detail::parse_id(tokens[0], line_no);
        const NodeId b = detail::parse_id(tokens[1], line_no);
        if (options.drop_self_loops && a == b) continue;
        pairs.emplace_back(a, b);
        if (options.symmetrize && a != b) pairs.emplace_back(b, a);
    }
    if (input.bad()) throw IoError("read failure after line " + std::to_string(line_no));
    return Relation::from_pairs(std::move(pairs));
}

}  // namespace cardbound
