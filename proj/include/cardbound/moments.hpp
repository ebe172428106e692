#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cardbound/error.hpp"
#include "cardbound/relation.hpp"

namespace cardbound {

using BigInt = boost::multiprecision::cpp_int;

namespace detail {

// ln sum_i exp(x_i), shifted by the maximum so that deg^50 terms stay finite.
template <typename Terms>
double log_sum_exp(const Terms& terms) {
    double peak = -std::numeric_limits<double>::infinity();
    for (double t : terms) peak = std::max(peak, t);
    if (!std::isfinite(peak)) return peak;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - peak);
    return peak + std::log(acc);
}

inline double log_u(std::uint64_t v) { return std::log(static_cast<double>(v)); }

}  // namespace detail

// ln M_p(R)_q = ln sum_{(a,b) in R} deg(a)^(p-1) deg(b)^(q-1), evaluated over the
// bi-degree histogram.
inline double ln_bivariate_moment(const Relation& rel, double p, double q) {
    if (!(p >= 1.0) || !(q >= 1.0))
        throw DomainError("bivariate moment requires p, q >= 1");
    auto hist = rel.bidegree_histogram();
    std::vector<double> terms;
    terms.reserve(hist.size());
    for (const auto& h : hist)
        terms.push_back(detail::log_u(h.pairs) + (p - 1.0) * detail::log_u(h.left) +
                        (q - 1.0) * detail::log_u(h.right));
    return detail::log_sum_exp(terms);
}

// ln sum_{a} deg(a)^p over one side of the relation. p = 0 is the support size,
// p = 1 the number of pairs.
inline double ln_dexterous_norm(const Relation& rel, double p, Side side = Side::left) {
    if (!(p >= 0.0)) throw DomainError("dexterous norm requires p >= 0");
    auto hist = rel.degree_histogram(side);
    std::vector<double> terms;
    terms.reserve(hist.size());
    for (const auto& h : hist) terms.push_back(detail::log_u(h.nodes) + p * detail::log_u(h.degree));
    return detail::log_sum_exp(terms);
}

struct DexterousPoint {
    double p;
    double ln_value;
};

struct AmbidextrousPoint {
    double p;
    double q;
    double ln_value;
};

// Parameter grids at which moments are precomputed.
struct GridSpec {
    std::vector<double> dex_ps;
    std::vector<std::pair<double, double>> ambi_pqs;

    // Sorts and deduplicates both lists.
    void canonicalize() {
        std::sort(dex_ps.begin(), dex_ps.end());
        dex_ps.erase(std::unique(dex_ps.begin(), dex_ps.end()), dex_ps.end());
        std::sort(ambi_pqs.begin(), ambi_pqs.end());
        ambi_pqs.erase(std::unique(ambi_pqs.begin(), ambi_pqs.end()), ambi_pqs.end());
    }

    // Dexterous p in {0, 1/k, ..., dex_max}; ambidextrous (p, q) in {1, 1 + 1/k, ..., ambi_max}^2.
    static GridSpec uniform(int steps_per_unit, int dex_max = 50, int ambi_max = 10) {
        if (steps_per_unit < 1) throw ConfigError("grid needs at least one step per unit");
        GridSpec g;
        const double k = steps_per_unit;
        for (int i = 0; i <= dex_max * steps_per_unit; ++i) g.dex_ps.push_back(i / k);
        std::vector<double> axis;
        for (int i = steps_per_unit; i <= ambi_max * steps_per_unit; ++i) axis.push_back(i / k);
        for (double p : axis)
            for (double q : axis) g.ambi_pqs.emplace_back(p, q);
        return g;
    }

    // Step 0.5 on both grids.
    static GridSpec coarse() { return uniform(2); }
    // Step 0.1: 501 dexterous points and 91 x 91 ambidextrous points.
    static GridSpec paper() { return uniform(10); }

    // Accepts steps of the form 1/k.
    static GridSpec with_step(double step) {
        if (!(step > 0.0) || step > 1.0) throw ConfigError("grid step must lie in (0, 1]");
        const double k = std::round(1.0 / step);
        if (std::abs(1.0 / k - step) > 1e-12)
            throw ConfigError("grid step must be the reciprocal of an integer");
        return uniform(static_cast<int>(k));
    }

    // Stable key for cache file names.
    std::uint64_t key() const {
        std::uint64_t h = 14695981039346656037ULL;
        auto mix = [&h](double v) {
            std::uint64_t bits;
            static_assert(sizeof bits == sizeof v);
            std::memcpy(&bits, &v, sizeof v);
            for (int i = 0; i < 8; ++i) {
                h ^= (bits >> (8 * i)) & 0xffU;
                h *= 1099511628211ULL;
            }
        };
        mix(static_cast<double>(dex_ps.size()));
        for (double p : dex_ps) mix(p);
        mix(static_cast<double>(ambi_pqs.size()));
        for (const auto& [p, q] : ambi_pqs) {
            mix(p);
            mix(q);
        }
        return h;
    }
};

// Precomputed log-moments of one relation.
struct MomentGrid {
    std::uint64_t relation_digest = 0;
    std::vector<DexterousPoint> dex_left;
    std::vector<DexterousPoint> dex_right;
    std::vector<AmbidextrousPoint> ambidextrous;
    std::uint64_t max_left_degree = 0;
    std::uint64_t max_right_degree = 0;

    const std::vector<DexterousPoint>& dexterous(Side side) const {
        return side == Side::left ? dex_left : dex_right;
    }
    std::uint64_t max_degree(Side side) const { return side == Side::left ? max_left_degree : max_right_degree; }
};

inline MomentGrid build_moment_grid(const Relation& rel, GridSpec spec) {
    spec.canonicalize();
    if (spec.dex_ps.empty() && spec.ambi_pqs.empty()) throw ConfigError("moment grid is empty");
    for (double p : spec.dex_ps)
        if (!(p >= 0.0)) throw DomainError("dexterous grid point below 0");
    for (const auto& [p, q] : spec.ambi_pqs)
        if (!(p >= 1.0) || !(q >= 1.0)) throw DomainError("ambidextrous grid point below 1");

    MomentGrid grid;
    grid.relation_digest = rel.digest();
    grid.max_left_degree = rel.max_degree(Side::left);
    grid.max_right_degree = rel.max_degree(Side::right);
    for (double p : spec.dex_ps) {
        grid.dex_left.push_back({p, ln_dexterous_norm(rel, p, Side::left)});
        grid.dex_right.push_back({p, ln_dexterous_norm(rel, p, Side::right)});
    }
    for (const auto& [p, q] : spec.ambi_pqs) grid.ambidextrous.push_back({p, q, ln_bivariate_moment(rel, p, q)});
    return grid;
}

// Exact count of tuples (a_1..a_{q-1}, b, a, b_1..b_{p-1}) with (a_i, b), (a, b),
// (a, b_j) all in R, by direct enumeration. Test oracle for integer moments.
inline BigInt enumerate_claw_pairs(const Relation& rel, int p, int q, double budget = 1e9) {
    if (p < 1 || q < 1) throw DomainError("claw pair enumeration requires p, q >= 1");
    const auto pairs = rel.pairs();
    const double work = std::pow(static_cast<double>(pairs.size()), p + q - 1);
    if (work > budget) throw ResourceError("claw pair enumeration exceeds budget");

    // Slots 0..q-2 pick pairs (a_i, b); slots q-1..p+q-3 pick pairs (a, b_j).
    const std::size_t slots = static_cast<std::size_t>(p + q - 2);
    const std::size_t left_slots = static_cast<std::size_t>(q - 1);
    BigInt total = 0;
    std::vector<std::size_t> cursor(slots + 1, 0);
    for (const auto& [a, b] : pairs) {
        auto matches = [&](std::size_t slot, const Pair& candidate) {
            return slot < left_slots ? candidate.second == b : candidate.first == a;
        };
        if (slots == 0) {
            total += 1;
            continue;
        }
        std::uint64_t found = 0;
        std::size_t depth = 0;
        cursor[0] = 0;
        while (true) {
            if (cursor[depth] == pairs.size()) {
                if (depth == 0) break;
                ++cursor[--depth];
            } else if (!matches(depth, pairs[cursor[depth]])) {
                ++cursor[depth];
            } else if (depth + 1 == slots) {
                ++found;
                ++cursor[depth];
            } else {
                cursor[++depth] = 0;
            }
        }
        total += found;
    }
    return total;
}

// Moment cache: a versioned header, then `kind,p,q,ln_value` rows.
namespace moment_cache {

inline constexpr const char* kVersion = "cardbound-moments v1";

inline std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string header(std::uint64_t digest, std::uint64_t grid_key) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "# %s digest=%016llx grid=%016llx", kVersion,
                  static_cast<unsigned long long>(digest), static_cast<unsigned long long>(grid_key));
    return buf;
}

inline void write(std::ostream& out, const MomentGrid& grid, std::uint64_t grid_key) {
    out << header(grid.relation_digest, grid_key) << '\n';
    out << "kind,p,q,ln_value\n";
    for (const auto& d : grid.dex_left) out << "dex_left," << format_real(d.p) << ",1," << format_real(d.ln_value) << '\n';
    for (const auto& d : grid.dex_right) out << "dex_right," << format_real(d.p) << ",1," << format_real(d.ln_value) << '\n';
    for (const auto& a : grid.ambidextrous)
        out << "ambi," << format_real(a.p) << ',' << format_real(a.q) << ',' << format_real(a.ln_value) << '\n';
}

// Returns false when the header does not match (stale cache); throws on corrupt rows.
inline bool read(std::istream& in, const Relation& rel, std::uint64_t grid_key, MomentGrid& grid) {
    std::string line;
    if (!std::getline(in, line) || line != header(rel.digest(), grid_key)) return false;
    if (!std::getline(in, line) || line != "kind,p,q,ln_value") return false;
    MomentGrid g;
    g.relation_digest = rel.digest();
    g.max_left_degree = rel.max_degree(Side::left);
    g.max_right_degree = rel.max_degree(Side::right);
    std::size_t line_no = 2;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string kind, p, q, v;
        if (!std::getline(fields, kind, ',') || !std::getline(fields, p, ',') || !std::getline(fields, q, ',') ||
            !std::getline(fields, v))
            throw ParseError(line_no, "malformed moment cache row");
        try {
            const double pv = std::stod(p), qv = std::stod(q), lv = std::stod(v);
            if (kind == "dex_left") g.dex_left.push_back({pv, lv});
            else if (kind == "dex_right") g.dex_right.push_back({pv, lv});
            else if (kind == "ambi") g.ambidextrous.push_back({pv, qv, lv});
            else throw ParseError(line_no, "unknown moment kind '" + kind + "'");
        } catch (const std::logic_error&) {
            throw ParseError(line_no, "non-numeric moment cache field");
        }
    }
    grid = std::move(g);
    return true;
}

inline std::filesystem::path path_for(const std::filesystem::path& dir, const Relation& rel, std::uint64_t grid_key) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "moments-%016llx-%016llx.csv", static_cast<unsigned long long>(rel.digest()),
                  static_cast<unsigned long long>(grid_key));
    return dir / buf;
}

}  // namespace moment_cache

// Loads the grid from `cache_dir` when a matching file exists, otherwise builds
// it and writes the cache. An empty `cache_dir` disables caching.
inline MomentGrid load_or_build_moment_grid(const Relation& rel, GridSpec spec,
                                            const std::filesystem::path& cache_dir) {
    spec.canonicalize();
    if (cache_dir.empty()) return build_moment_grid(rel, spec);
    const std::uint64_t key = spec.key();
    const auto path = moment_cache::path_for(cache_dir, rel, key);
    if (std::ifstream in(path); in) {
        MomentGrid grid;
        if (moment_cache::read(in, rel, key, grid)) return grid;
    }
    MomentGrid grid = build_moment_grid(rel, spec);
    std::error_code ec;
    std::filesystem::create_directories(cache_dir, ec);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write moment cache " + path.string());
    moment_cache::write(out, grid, key);
    if (!out) throw IoError("failed writing moment cache " + path.string());
    return grid;
}

}  // namespace cardbound
