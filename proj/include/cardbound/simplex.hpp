#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace cardbound {

// Sparse row a.x <= rhs.
struct LpRow {
    std::vector<std::pair<int, double>> coeffs;
    double rhs = 0.0;
};

enum class LpStatus { optimal, unbounded, numeric_failure };

struct LpSolution {
    LpStatus status = LpStatus::numeric_failure;
    double objective = 0.0;
    std::vector<double> x;           // primal point (valid when optimal)
    std::vector<std::size_t> tight;  // rows active within the activity tolerance
    std::size_t iterations = 0;
};

struct SimplexOptions {
    double objective_tolerance = 1e-7;
    double activity_tolerance = 1e-6;
    double pivot_tolerance = 1e-9;
    std::size_t max_iterations = 200000;
    std::size_t degenerate_switch = 50;  // consecutive degenerate pivots before Bland's rule
    std::size_t refactor_every = 64;
};

// maximize c.x subject to rows, x free.
//
// Solved through its dual, min b.y s.t. A^T y = c, y >= 0, which has one
// equality per variable (at most 31 here) and one column per row. The primal
// point is read off the dual multipliers of the optimal basis.
class DualSimplex {
public:
    DualSimplex(std::size_t num_vars, const std::vector<LpRow>& rows, std::vector<double> objective,
                SimplexOptions options = {})
        : m_(num_vars), rows_(rows), c_(std::move(objective)), opt_(options) {}

    LpSolution solve() {
        LpSolution out;
        const std::size_t n_rows = rows_.size();
        // Columns 0..n_rows-1 are structural, n_rows..n_rows+m-1 artificial.
        art_base_ = n_rows;
        basis_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) basis_[i] = art_base_ + i;
        in_basis_.assign(n_rows + m_, -1);
        for (std::size_t i = 0; i < m_; ++i) in_basis_[basis_[i]] = static_cast<int>(i);
        // The artificial equalities use sign(c_i) so that the starting point is nonnegative.
        art_sign_.assign(m_, 1.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (c_[i] < 0) art_sign_[i] = -1.0;

        // Phase 1: minimize the sum of artificials.
        cost_.assign(n_rows + m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) cost_[art_base_ + i] = 1.0;
        if (!refactor()) return fail(out);
        auto phase1 = iterate(out.iterations);
        if (phase1 != LpStatus::optimal) return fail(out);
        double infeasibility = 0.0;
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= art_base_) infeasibility += xb_[i];
        if (infeasibility > 1e-9) {
            // No nonnegative combination of rows yields the objective: the primal is unbounded.
            out.status = LpStatus::unbounded;
            return out;
        }
        drive_out_artificials();

        // Phase 2: minimize b.y.
        std::fill(cost_.begin(), cost_.end(), 0.0);
        for (std::size_t j = 0; j < n_rows; ++j) cost_[j] = rows_[j].rhs;
        if (!refactor()) return fail(out);
        auto phase2 = iterate(out.iterations);
        if (phase2 != LpStatus::optimal) return fail(out);

        // Final clean solve of the multipliers from a fresh factorization.
        if (!refactor()) return fail(out);
        std::vector<double> pi = duals();
        out.x = pi;
        out.objective = 0.0;
        for (std::size_t i = 0; i < m_; ++i) out.objective += c_[i] * pi[i];

        double worst = 0.0;
        for (std::size_t j = 0; j < n_rows; ++j) {
            const double slack = rows_[j].rhs - dot(j, pi);
            worst = std::min(worst, slack);
            if (slack <= opt_.activity_tolerance) out.tight.push_back(j);
        }
        if (worst < -opt_.activity_tolerance || !std::isfinite(out.objective)) return fail(out);
        out.status = LpStatus::optimal;
        return out;
    }

private:
    LpSolution& fail(LpSolution& out) {
        out.status = LpStatus::numeric_failure;
        out.x.clear();
        out.tight.clear();
        return out;
    }

    // Column j of the dual constraint matrix, as (row, value) entries.
    template <typename F>
    void for_column(std::size_t j, F&& f) const {
        if (j >= art_base_) {
            f(j - art_base_, art_sign_[j - art_base_]);
            return;
        }
        for (const auto& [var, coef] : rows_[j].coeffs) f(static_cast<std::size_t>(var), coef);
    }

    double dot(std::size_t j, const std::vector<double>& pi) const {
        double s = 0.0;
        for_column(j, [&](std::size_t i, double v) { s += v * pi[i]; });
        return s;
    }

    // pi = c_B^T B^{-1}
    std::vector<double> duals() const {
        std::vector<double> pi(m_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) {
            const double cb = cost_[basis_[r]];
            if (cb == 0.0) continue;
            for (std::size_t i = 0; i < m_; ++i) pi[i] += cb * binv_[r * m_ + i];
        }
        return pi;
    }

    // Rebuilds B^{-1} and x_B by Gauss-Jordan elimination with partial pivoting.
    bool refactor() {
        std::vector<double> b(m_ * m_, 0.0);
        for (std::size_t r = 0; r < m_; ++r)
            for_column(basis_[r], [&](std::size_t i, double v) { b[i * m_ + r] = v; });
        binv_.assign(m_ * m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) binv_[i * m_ + i] = 1.0;
        for (std::size_t col = 0; col < m_; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < m_; ++r)
                if (std::abs(b[r * m_ + col]) > std::abs(b[piv * m_ + col])) piv = r;
            if (std::abs(b[piv * m_ + col]) < 1e-12) return false;
            if (piv != col) {
                for (std::size_t k = 0; k < m_; ++k) {
                    std::swap(b[piv * m_ + k], b[col * m_ + k]);
                    std::swap(binv_[piv * m_ + k], binv_[col * m_ + k]);
                }
            }
            const double d = b[col * m_ + col];
            for (std::size_t k = 0; k < m_; ++k) {
                b[col * m_ + k] /= d;
                binv_[col * m_ + k] /= d;
            }
            for (std::size_t r = 0; r < m_; ++r) {
                if (r == col) continue;
                const double f = b[r * m_ + col];
                if (f == 0.0) continue;
                for (std::size_t k = 0; k < m_; ++k) {
                    b[r * m_ + k] -= f * b[col * m_ + k];
                    binv_[r * m_ + k] -= f * binv_[col * m_ + k];
                }
            }
        }
        // binv_ rows are indexed by basis position.
        xb_.assign(m_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) {
            double s = 0.0;
            for (std::size_t i = 0; i < m_; ++i) s += binv_[r * m_ + i] * c_[i];
            xb_[r] = std::max(s, 0.0);
        }
        since_refactor_ = 0;
        return true;
    }

    std::vector<double> ftran(std::size_t j) const {
        std::vector<double> u(m_, 0.0);
        for_column(j, [&](std::size_t i, double v) {
            for (std::size_t r = 0; r < m_; ++r) u[r] += binv_[r * m_ + i] * v;
        });
        return u;
    }

    void pivot(std::size_t leave_pos, std::size_t enter, const std::vector<double>& u) {
        const double d = u[leave_pos];
        const double step = xb_[leave_pos] / d;
        for (std::size_t r = 0; r < m_; ++r) {
            if (r == leave_pos) continue;
            xb_[r] = std::max(xb_[r] - step * u[r], 0.0);
        }
        xb_[leave_pos] = step;
        for (std::size_t k = 0; k < m_; ++k) binv_[leave_pos * m_ + k] /= d;
        for (std::size_t r = 0; r < m_; ++r) {
            if (r == leave_pos || u[r] == 0.0) continue;
            const double f = u[r];
            for (std::size_t k = 0; k < m_; ++k) binv_[r * m_ + k] -= f * binv_[leave_pos * m_ + k];
        }
        in_basis_[basis_[leave_pos]] = -1;
        basis_[leave_pos] = enter;
        in_basis_[enter] = static_cast<int>(leave_pos);
        ++since_refactor_;
    }

    LpStatus iterate(std::size_t& iterations) {
        // Artificials never re-enter once they leave.
        const std::size_t n_cols = cost_.size();
        const std::size_t n_enterable = art_base_;
        std::size_t degenerate_run = 0;
        while (true) {
            if (iterations++ > opt_.max_iterations) return LpStatus::numeric_failure;
            if (since_refactor_ >= opt_.refactor_every && !refactor()) return LpStatus::numeric_failure;

            const std::vector<double> pi = duals();
            const bool bland = degenerate_run >= opt_.degenerate_switch;
            std::size_t enter = n_cols;
            double best = -opt_.pivot_tolerance;
            for (std::size_t j = 0; j < n_enterable; ++j) {
                if (in_basis_[j] >= 0) continue;
                const double d = cost_[j] - dot(j, pi);
                if (d < best) {
                    enter = j;
                    if (bland) break;
                    best = d;
                }
            }
            if (enter == n_cols) return LpStatus::optimal;

            const std::vector<double> u = ftran(enter);
            std::size_t leave = m_;
            double ratio = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m_; ++r) {
                if (u[r] <= opt_.pivot_tolerance) continue;
                const double t = xb_[r] / u[r];
                if (leave == m_ || t < ratio - 1e-12) {
                    ratio = t;
                    leave = r;
                } else if (t <= ratio + 1e-12 && basis_[r] < basis_[leave]) {
                    leave = r;
                }
            }
            if (leave == m_) return LpStatus::numeric_failure;  // dual unbounded: primal infeasible
            degenerate_run = ratio <= 1e-12 ? degenerate_run + 1 : 0;
            pivot(leave, enter, u);
        }
    }

    // Replaces zero-valued artificials in the basis by structural columns.
    void drive_out_artificials() {
        for (std::size_t r = 0; r < m_; ++r) {
            if (basis_[r] < art_base_) continue;
            for (std::size_t j = 0; j < art_base_; ++j) {
                if (in_basis_[j] >= 0) continue;
                double entry = 0.0;
                for_column(j, [&](std::size_t i, double v) { entry += binv_[r * m_ + i] * v; });
                if (std::abs(entry) > 1e-7) {
                    pivot(r, j, ftran(j));
                    break;
                }
            }
        }
    }

    std::size_t m_;
    const std::vector<LpRow>& rows_;
    std::vector<double> c_;
    SimplexOptions opt_;

    std::size_t art_base_ = 0;
    std::vector<double> art_sign_;
    std::vector<double> cost_;
    std::vector<std::size_t> basis_;
    std::vector<int> in_basis_;
    std::vector<double> binv_;
    std::vector<double> xb_;
    std::size_t since_refactor_ = 0;
};

inline LpSolution solve_lp(std::size_t num_vars, const std::vector<LpRow>& rows, std::vector<double> objective,
                           SimplexOptions options = {}) {
    return DualSimplex(num_vars, rows, std::move(objective), options).solve();
}

}  // namespace cardbound
