#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>

#include "cardbound/error.hpp"
#include "cardbound/moments.hpp"
#include "cardbound/relation.hpp"

namespace cardbound {

// Coefficients on one pair-line of three variables. For line XY these are
// H(Y|X), I(X;Y), H(X|Y); for YZ: H(Z|Y), I(Y;Z), H(Y|Z); for ZX: H(X|Z), I(Z;X), H(Z|X).
struct LineCoefficients {
    double forward = 0.0;   // H(second | first)
    double mutual = 0.0;    // I(first; second)
    double backward = 0.0;  // H(first | second)
};

// A nonnegative combination of the nine pairwise terms, lines ordered XY, YZ, ZX.
struct VennCover {
    std::array<LineCoefficients, 3> lines{};

    VennCover scaled(double f) const {
        VennCover c = *this;
        for (auto& l : c.lines) {
            l.forward *= f;
            l.mutual *= f;
            l.backward *= f;
        }
        return c;
    }
};

// Venn cells of three variables, in this order.
enum VennCell { h_x_yz, h_y_zx, h_z_xy, i_xy_z, i_yz_x, i_zx_y, i_xyz };

inline constexpr std::array<std::string_view, 7> kVennCellNames = {
    "H(X|YZ)", "H(Y|ZX)", "H(Z|XY)", "I(X;Y|Z)", "I(Y;Z|X)", "I(Z;X|Y)", "I(X;Y;Z)"};

using VennBasis = std::array<double, 7>;

inline constexpr double kVennTolerance = 1e-12;

struct VennVerdict {
    bool applicable = false;  // every I coefficient <= both H coefficients on its line
    bool covering = false;
    VennBasis basis{};
    std::string witness;  // first cell below 1, when rejecting an applicable cover
};

inline void validate(const VennCover& cover) {
    for (const auto& l : cover.lines)
        if (!(l.forward >= 0.0) || !(l.mutual >= 0.0) || !(l.backward >= 0.0))
            throw DomainError("Venn cover coefficients must be nonnegative and finite");
}

// Change of basis to the seven Venn cells. On line (first, second, other):
// H(second|first) covers cell(second alone) and I(second;other|first);
// H(first|second) covers cell(first alone) and I(first;other|second);
// I(first;second) covers I(first;second|other) and the centre.
inline VennBasis venn_basis(const VennCover& cover) {
    validate(cover);
    VennBasis b{};
    struct LineCells {
        VennCell second_alone, second_other, first_alone, first_other, pair;
    };
    static constexpr std::array<LineCells, 3> kLines = {{
        {h_y_zx, i_yz_x, h_x_yz, i_zx_y, i_xy_z},  // XY
        {h_z_xy, i_zx_y, h_y_zx, i_xy_z, i_yz_x},  // YZ
        {h_x_yz, i_xy_z, h_z_xy, i_yz_x, i_zx_y},  // ZX
    }};
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& l = cover.lines[k];
        const auto& cells = kLines[k];
        b[cells.second_alone] += l.forward;
        b[cells.second_other] += l.forward;
        b[cells.first_alone] += l.backward;
        b[cells.first_other] += l.backward;
        b[cells.pair] += l.mutual;
        b[i_xyz] += l.mutual;
    }
    return b;
}

inline VennVerdict check_cover(const VennCover& cover) {
    VennVerdict v;
    v.basis = venn_basis(cover);
    v.applicable = std::all_of(cover.lines.begin(), cover.lines.end(), [](const LineCoefficients& l) {
        return l.mutual <= l.forward && l.mutual <= l.backward;
    });
    if (!v.applicable) return v;
    v.covering = true;
    for (std::size_t i = 0; i < v.basis.size(); ++i) {
        if (v.basis[i] < 1.0 - kVennTolerance) {
            v.covering = false;
            v.witness = std::string(kVennCellNames[i]);
            break;
        }
    }
    return v;
}

// Joint entropies of (X, Y, Z): singletons, pairs, and the triple.
struct TripleEntropy {
    double x = 0, y = 0, z = 0, xy = 0, yz = 0, zx = 0, xyz = 0;
};

// Value of the nine-term combination for a concrete entropy vector.
inline double evaluate_cover(const VennCover& cover, const TripleEntropy& h) {
    struct LineTerms {
        double first, second, joint;
    };
    const std::array<LineTerms, 3> lines = {{{h.x, h.y, h.xy}, {h.y, h.z, h.yz}, {h.z, h.x, h.zx}}};
    double total = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& t = lines[k];
        const auto& c = cover.lines[k];
        total += c.forward * (t.joint - t.first) + c.mutual * (t.first + t.second - t.joint) +
                 c.backward * (t.joint - t.second);
    }
    return total;
}

namespace detail {

inline double parse_rational(std::string_view token) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        return s;
    };
    auto number = [&](std::string_view s) {
        s = trim(s);
        double v{};
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
            throw DomainError("not a number: '" + std::string(s) + "'");
        return v;
    };
    const auto slash = token.find('/');
    if (slash == std::string_view::npos) return number(token);
    const double den = number(token.substr(slash + 1));
    if (den == 0.0) throw DomainError("zero denominator in '" + std::string(token) + "'");
    return number(token.substr(0, slash)) / den;
}

}  // namespace detail

// Nine comma-separated rationals ("4/9,1/3,5/9,..."), lines XY, YZ, ZX.
inline VennCover parse_cover(std::string_view text) {
    std::array<double, 9> v{};
    std::size_t count = 0;
    while (true) {
        const auto comma = text.find(',');
        if (count == 9) throw DomainError("cover needs exactly nine coefficients");
        v[count++] = detail::parse_rational(text.substr(0, comma));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    if (count != 9) throw DomainError("cover needs exactly nine coefficients");
    VennCover c;
    for (std::size_t k = 0; k < 3; ++k) c.lines[k] = {v[3 * k], v[3 * k + 1], v[3 * k + 2]};
    validate(c);
    return c;
}

struct RefinedTerm {
    double w_star = 1.0;
    double ln_bound = 0.0;
};

// f(w) = w ln M_{p/w}(R)_{q/w}: the single-moment bound on p H(Y|X) + I(X;Y) + q H(X|Y)
// after raising the I coefficient to w.
inline double single_term_value(const Relation& rel, double p, double q, double w) {
    return w * ln_bivariate_moment(rel, p / w, q / w);
}

// Minimizes f over w in [1, min(p, q)] by ternary search; f is convex in w.
inline RefinedTerm refine_single_term(const Relation& rel, double p, double q, double tol = 1e-6) {
    if (!(p >= 1.0) || !(q >= 1.0)) throw DomainError("refinement requires p, q >= 1");
    if (!(tol > 0.0)) throw DomainError("refinement tolerance must be positive");
    double lo = 1.0, hi = std::min(p, q);
    auto f = [&](double w) { return single_term_value(rel, p, q, w); };
    for (int iter = 0; iter < 200 && hi - lo >= tol; ++iter) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (f(m1) <= f(m2)) hi = m2;
        else lo = m1;
    }
    RefinedTerm best{1.0, f(1.0)};
    for (double w : {0.5 * (lo + hi), std::min(p, q)}) {
        const double v = f(w);
        if (v < best.ln_bound) best = {w, v};
    }
    return best;
}

}  // namespace cardbound
