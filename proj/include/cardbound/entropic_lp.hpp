#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cardbound/error.hpp"
#include "cardbound/moments.hpp"
#include "cardbound/query_catalog.hpp"
#include "cardbound/relation.hpp"
#include "cardbound/simplex.hpp"

namespace cardbound {

// Vertex subsets are bitmasks; h_empty = 0 is eliminated, so subset S lives in slot S - 1.
using VertexSet = std::uint32_t;

inline constexpr int slot_of(VertexSet s) { return static_cast<int>(s) - 1; }
inline constexpr VertexSet full_set(int n) { return (VertexSet{1} << n) - 1; }

inline constexpr double kObjectiveTolerance = 1e-7;
inline constexpr double kActivityTolerance = 1e-6;

enum class BoundMode { dexterous, ambidextrous };

inline const char* to_string(BoundMode m) { return m == BoundMode::dexterous ? "dexterous" : "ambidextrous"; }

// coefficients . h <= rhs, with a human-readable origin.
struct EntropyRow {
    std::map<int, double> coeffs;  // slot -> coefficient, zeros removed
    double rhs = 0.0;
    std::string label;

    void add(VertexSet s, double c) {
        if (s == 0 || c == 0.0) return;
        auto& v = coeffs[slot_of(s)];
        v += c;
        if (v == 0.0) coeffs.erase(slot_of(s));
    }
};

// maximize h_V over the polymatroid cone cut by statistics rows.
struct EntropicProgram {
    int n = 0;
    std::vector<EntropyRow> rows;

    std::size_t num_vars() const { return full_set(n); }
    int objective_slot() const { return slot_of(full_set(n)); }
};

inline std::string subset_name(VertexSet s) {
    static constexpr char kNames[] = "XYZWV";
    std::string out;
    for (int i = 0; i < 5; ++i)
        if (s & (VertexSet{1} << i)) out += kNames[i];
    if (s >> 5) out += "+" + std::to_string(s);
    return out;
}

// Monotonicity h_V >= h_{V-i} and elemental submodularity
// h_{S+i} + h_{S+j} >= h_{S+i+j} + h_S, written as <= 0 rows.
inline std::vector<EntropyRow> elemental_inequalities(int n) {
    if (n < 1 || n > 8) throw DomainError("elemental inequalities need 1 <= n <= 8");
    const VertexSet all = full_set(n);
    std::vector<EntropyRow> rows;
    for (int i = 0; i < n; ++i) {
        EntropyRow r;
        r.add(all & ~(VertexSet{1} << i), 1.0);
        r.add(all, -1.0);
        r.label = "mono(" + subset_name(all) + ">=" + subset_name(all & ~(VertexSet{1} << i)) + ")";
        rows.push_back(std::move(r));
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const VertexSet ij = (VertexSet{1} << i) | (VertexSet{1} << j);
            const VertexSet rest = all & ~ij;
            // Enumerate subsets of `rest`, including the empty set.
            for (VertexSet s = rest;; s = (s - 1) & rest) {
                EntropyRow r;
                r.add(s | ij, 1.0);
                r.add(s, 1.0);
                r.add(s | (VertexSet{1} << i), -1.0);
                r.add(s | (VertexSet{1} << j), -1.0);
                r.label = "sub(" + std::to_string(i) + "," + std::to_string(j) + "|" + subset_name(s) + ")";
                rows.push_back(std::move(r));
                if (s == 0) break;
            }
        }
    }
    return rows;
}

struct StatisticsOptions {
    bool dexterous_rows = true;
    bool max_degree_rows = true;
};

namespace detail {

inline std::string fmt_param(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace detail

// Rows bounding the entropy of one query edge (u, v) whose relation's left
// column binds u. Both orientations are emitted.
inline std::vector<EntropyRow> statistics_constraints(QueryEdge edge, const MomentGrid& grid, BoundMode mode,
                                                      const StatisticsOptions& options = {}) {
    const auto [u, v] = edge;
    if (u == v) throw DomainError("statistics edge must join two distinct vertices");
    const VertexSet su = VertexSet{1} << u, sv = VertexSet{1} << v, suv = su | sv;
    std::vector<EntropyRow> rows;

    struct Orientation {
        VertexSet from, to;
        Side side;
    };
    const Orientation orientations[2] = {{su, sv, Side::left}, {sv, su, Side::right}};
    const std::string tag = subset_name(su) + subset_name(sv);

    if (options.dexterous_rows) {
        if (grid.dex_left.empty() || grid.dex_right.empty())
            throw ConfigError("moment grid lacks dexterous points");
        for (const auto& o : orientations) {
            // h_from + p (h_uv - h_from) <= ln sum deg^p
            for (const auto& point : grid.dexterous(o.side)) {
                EntropyRow r;
                r.add(o.from, 1.0 - point.p);
                r.add(suv, point.p);
                r.rhs = point.ln_value;
                r.label = "dex_" + std::string(o.side == Side::left ? "left" : "right") + "(" + tag + ",p=" +
                          detail::fmt_param(point.p) + ")";
                rows.push_back(std::move(r));
            }
        }
    }
    if (options.max_degree_rows) {
        for (const auto& o : orientations) {
            EntropyRow r;
            r.add(suv, 1.0);
            r.add(o.from, -1.0);
            r.rhs = std::log(static_cast<double>(grid.max_degree(o.side)));
            r.label = "maxdeg_" + std::string(o.side == Side::left ? "left" : "right") + "(" + tag + ")";
            rows.push_back(std::move(r));
        }
    }
    if (mode == BoundMode::ambidextrous) {
        if (grid.ambidextrous.empty()) throw ConfigError("moment grid lacks ambidextrous points");
        // p H(v|u) + I(u;v) + q H(u|v) <= ln M_p(R)_q, expanded into joint entropies.
        for (const auto& point : grid.ambidextrous) {
            EntropyRow r;
            r.add(suv, point.p + point.q - 1.0);
            r.add(su, 1.0 - point.p);
            r.add(sv, 1.0 - point.q);
            r.rhs = point.ln_value;
            r.label = "ambi(" + tag + ",p=" + detail::fmt_param(point.p) + ",q=" + detail::fmt_param(point.q) + ")";
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

// Keeps the smallest rhs for each distinct coefficient pattern, in first-seen order.
inline void prune_redundant_rows(std::vector<EntropyRow>& rows) {
    std::map<std::map<int, double>, std::size_t> best;
    std::vector<EntropyRow> kept;
    kept.reserve(rows.size());
    for (auto& r : rows) {
        if (r.coeffs.empty()) {
            if (r.rhs < 0.0) kept.push_back(std::move(r));  // infeasible row, keep for diagnosis
            continue;
        }
        auto [it, inserted] = best.emplace(r.coeffs, kept.size());
        if (inserted) {
            kept.push_back(std::move(r));
        } else if (r.rhs < kept[it->second].rhs) {
            kept[it->second] = std::move(r);
        }
    }
    rows = std::move(kept);
}

enum class BoundStatus { optimal, unbounded, numeric_failure };

inline const char* to_string(BoundStatus s) {
    switch (s) {
        case BoundStatus::optimal: return "optimal";
        case BoundStatus::unbounded: return "unbounded";
        default: return "numeric_failure";
    }
}

struct BoundResult {
    std::string query_name;
    BoundMode mode = BoundMode::dexterous;
    BoundStatus status = BoundStatus::numeric_failure;
    double ln_bound = 0.0;
    double bound = 0.0;
    std::vector<std::size_t> tight_rows;  // indices into the solved program's rows
    std::vector<double> entropy;          // optimal h, by slot
};

inline BoundResult solve_lp(const EntropicProgram& program, SimplexOptions options = {}) {
    options.objective_tolerance = kObjectiveTolerance;
    options.activity_tolerance = kActivityTolerance;
    std::vector<LpRow> rows;
    rows.reserve(program.rows.size());
    for (const auto& r : program.rows) {
        for (const auto& [slot, c] : r.coeffs)
            if (slot < 0 || static_cast<std::size_t>(slot) >= program.num_vars() || !std::isfinite(c))
                throw ConfigError("malformed program row '" + r.label + "'");
        if (!std::isfinite(r.rhs)) throw ConfigError("non-finite rhs in row '" + r.label + "'");
        LpRow lp;
        lp.coeffs.assign(r.coeffs.begin(), r.coeffs.end());
        lp.rhs = r.rhs;
        rows.push_back(std::move(lp));
    }
    std::vector<double> objective(program.num_vars(), 0.0);
    objective[program.objective_slot()] = 1.0;

    const LpSolution sol = solve_lp(program.num_vars(), rows, std::move(objective), options);
    BoundResult out;
    switch (sol.status) {
        case LpStatus::optimal:
            out.status = BoundStatus::optimal;
            out.ln_bound = sol.objective;
            out.bound = std::exp(sol.objective);
            out.tight_rows = sol.tight;
            out.entropy = sol.x;
            break;
        case LpStatus::unbounded: out.status = BoundStatus::unbounded; break;
        default: out.status = BoundStatus::numeric_failure; break;
    }
    return out;
}

// Entropic program for `query` with edge i bound to edge_grids[i].
inline EntropicProgram build_program(const QueryGraph& query, std::span<const MomentGrid* const> edge_grids,
                                     BoundMode mode, const StatisticsOptions& options = {}) {
    if (edge_grids.size() != query.edges.size())
        throw ConfigError("need one moment grid per query edge");
    EntropicProgram program;
    program.n = query.n;
    program.rows = elemental_inequalities(query.n);
    for (std::size_t i = 0; i < query.edges.size(); ++i) {
        auto rows = statistics_constraints(query.edges[i], *edge_grids[i], mode, options);
        for (auto& r : rows) program.rows.push_back(std::move(r));
    }
    prune_redundant_rows(program.rows);
    return program;
}

inline BoundResult compute_bound(const QueryGraph& query, std::span<const MomentGrid* const> edge_grids,
                                 BoundMode mode, const StatisticsOptions& options = {}) {
    BoundResult r = solve_lp(build_program(query, edge_grids, mode, options));
    r.query_name = query.name;
    r.mode = mode;
    return r;
}

// Self-join over one symmetric relation: every query edge uses `grid`.
inline BoundResult compute_bound(const QueryGraph& query, const Relation& rel, const MomentGrid& grid,
                                 BoundMode mode, const StatisticsOptions& options = {}) {
    if (!rel.symmetric()) throw DomainError("undirected query needs a symmetric relation");
    if (grid.relation_digest != rel.digest()) throw ConfigError("moment grid belongs to a different relation");
    std::vector<const MomentGrid*> grids(query.edges.size(), &grid);
    return compute_bound(query, grids, mode, options);
}

inline BoundResult compute_bound(const QueryGraph& query, const Relation& rel, BoundMode mode,
                                 const GridSpec& spec = GridSpec::coarse(), const StatisticsOptions& options = {}) {
    return compute_bound(query, rel, build_moment_grid(rel, spec), mode, options);
}

// CPLEX LP text format, for cross-checking with external solvers.
inline void write_lp_format(std::ostream& out, const EntropicProgram& program) {
    auto var = [](int slot) { return "h_" + subset_name(static_cast<VertexSet>(slot + 1)); };
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "\\ entropic program, " << program.rows.size() << " rows\n";
    out << "Maximize\n obj: " << var(program.objective_slot()) << "\nSubject To\n";
    for (std::size_t i = 0; i < program.rows.size(); ++i) {
        const auto& r = program.rows[i];
        out << " r" << i << ":";
        for (const auto& [slot, c] : r.coeffs) out << (c < 0 ? " - " : " + ") << num(std::abs(c)) << ' ' << var(slot);
        out << " <= " << num(r.rhs) << '\n';
    }
    out << "Bounds\n";
    for (std::size_t s = 0; s < program.num_vars(); ++s) out << " " << var(static_cast<int>(s)) << " free\n";
    out << "End\n";
}

}  // namespace cardbound
