#pragma once

// Exact rational linear programming: two-phase primal simplex with Bland's
// pivot rule (termination + determinism), Farkas infeasibility certificates,
// and hull membership queries. All downstream certificate questions reduce
// to this solver.

#include <cstddef>
#include <optional>
#include <vector>

#include "optcert/rational.hpp"

namespace optcert {

enum class RowSense { LE, EQ };

struct LPRow {
    Vec coeffs;
    Rational rhs;
    RowSense sense = RowSense::LE;
};

enum class ObjSense { Maximize, Minimize };

struct LinearProgram {
    int num_vars = 0;
    std::vector<LPRow> rows;
    std::optional<Vec> objective;  // absent = pure feasibility question
    ObjSense sense = ObjSense::Maximize;
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

// Infeasibility certificates are row multipliers u (one per input row,
// u >= 0 on <= rows, free on = rows) such that the aggregated functional
// sum_k u_k * row_k vanishes on free variables, is >= 0 on variables
// declared nonnegative, and sum_k u_k * rhs_k = -1 < 0. Multiplying the
// certificate out against any candidate point refutes feasibility in one
// matrix multiply.
struct LPResult {
    LPStatus status = LPStatus::Optimal;
    Vec solution;    // when Optimal
    Rational value;  // when Optimal; 0 for pure feasibility runs
    Vec farkas;      // when Infeasible
};

namespace detail {

constexpr std::size_t kNoCol = static_cast<std::size_t>(-1);

class Simplex {
public:
    Simplex(int num_vars, const std::vector<LPRow>& rows, const std::vector<bool>& nonneg)
        : nvars_(static_cast<std::size_t>(num_vars)), nrows_(rows.size()) {
        if (num_vars <= 0) throw InputError("lp: num_vars must be positive");
        if (nonneg.size() != nvars_) throw InputError("lp: nonneg mask size mismatch");
        pos_col_.assign(nvars_, kNoCol);
        neg_col_.assign(nvars_, kNoCol);
        std::size_t next = 0;
        for (std::size_t j = 0; j < nvars_; ++j) {
            pos_col_[j] = next++;
            if (!nonneg[j]) neg_col_[j] = next++;
        }
        slack_col_.assign(nrows_, kNoCol);
        for (std::size_t i = 0; i < nrows_; ++i)
            if (rows[i].sense == RowSense::LE) slack_col_[i] = next++;
        art_base_ = next;
        total_ = next + nrows_;

        a_.assign(nrows_, Vec(total_, Rational(0)));
        b_.assign(nrows_, Rational(0));
        sign_.assign(nrows_, Rational(1));
        basis_.assign(nrows_, kNoCol);
        live_.assign(nrows_, true);
        for (std::size_t i = 0; i < nrows_; ++i) {
            const LPRow& r = rows[i];
            if (r.coeffs.size() != nvars_)
                throw InputError("lp: row " + std::to_string(i) + " has wrong dimension");
            if (r.rhs < 0) sign_[i] = -1;
            for (std::size_t j = 0; j < nvars_; ++j) {
                a_[i][pos_col_[j]] = sign_[i] * r.coeffs[j];
                if (neg_col_[j] != kNoCol) a_[i][neg_col_[j]] = -sign_[i] * r.coeffs[j];
            }
            if (slack_col_[i] != kNoCol) a_[i][slack_col_[i]] = sign_[i];
            a_[i][art_base_ + i] = 1;
            b_[i] = sign_[i] * r.rhs;
            basis_[i] = art_base_ + i;
        }
    }

    // Runs phase 1. Returns true when feasible; otherwise `farkas` receives
    // the normalized row-multiplier certificate.
    bool phase1(Vec& farkas) {
        d_.assign(total_, Rational(0));
        obj_ = 0;
        for (std::size_t j = 0; j < total_; ++j) {
            Rational colsum = 0;
            for (std::size_t i = 0; i < nrows_; ++i) colsum += a_[i][j];
            d_[j] = (j >= art_base_ ? Rational(1) : Rational(0)) - colsum;
        }
        for (std::size_t i = 0; i < nrows_; ++i) obj_ += b_[i];
        run(art_base_);  // artificials may not (re-)enter
        if (obj_ > 0) {
            farkas.assign(nrows_, Rational(0));
            for (std::size_t k = 0; k < nrows_; ++k) {
                const Rational yk = Rational(1) - d_[art_base_ + k];
                farkas[k] = -sign_[k] * yk / obj_;
            }
            return false;
        }
        // Drive leftover artificials out of the basis (they sit at value 0).
        for (std::size_t i = 0; i < nrows_; ++i) {
            if (!live_[i] || basis_[i] < art_base_) continue;
            std::size_t enter = kNoCol;
            for (std::size_t j = 0; j < art_base_; ++j)
                if (a_[i][j] != 0) { enter = j; break; }
            if (enter == kNoCol) {
                live_[i] = false;  // redundant 0 = 0 row
            } else {
                pivot(i, enter);
            }
        }
        return true;
    }

    // Phase 2. Costs are given per original variable; internally always
    // minimizes. Returns false on unbounded.
    bool phase2(const Vec& objective, ObjSense sense) {
        const Rational flip = (sense == ObjSense::Maximize) ? Rational(-1) : Rational(1);
        Vec c_cols(total_, Rational(0));
        for (std::size_t j = 0; j < nvars_; ++j) {
            c_cols[pos_col_[j]] = flip * objective[j];
            if (neg_col_[j] != kNoCol) c_cols[neg_col_[j]] = -flip * objective[j];
        }
        d_ = c_cols;
        obj_ = 0;
        Vec cb(nrows_, Rational(0));
        for (std::size_t i = 0; i < nrows_; ++i)
            if (live_[i]) cb[i] = d_[basis_[i]];
        Vec fresh(total_, Rational(0));
        for (std::size_t j = 0; j < total_; ++j) {
            Rational s = d_[j];
            for (std::size_t i = 0; i < nrows_; ++i)
                if (live_[i] && cb[i] != 0) s -= cb[i] * a_[i][j];
            fresh[j] = s;
        }
        d_ = fresh;
        for (std::size_t i = 0; i < nrows_; ++i)
            if (live_[i]) obj_ += cb[i] * b_[i];
        return run(art_base_);
    }

    Rational objective_value() const { return obj_; }

    Rational column_value(std::size_t col) const {
        for (std::size_t i = 0; i < nrows_; ++i)
            if (live_[i] && basis_[i] == col) return b_[i];
        return 0;
    }

    Rational var_value(std::size_t j) const {
        Rational v = column_value(pos_col_[j]);
        if (neg_col_[j] != kNoCol) v -= column_value(neg_col_[j]);
        return v;
    }

    std::size_t num_vars() const { return nvars_; }

private:
    // Bland's rule: entering = lowest-index column with negative reduced
    // cost; leaving = lowest-ratio row, ties by lowest basic column index.
    bool run(std::size_t col_limit) {
        for (;;) {
            std::size_t enter = kNoCol;
            for (std::size_t j = 0; j < col_limit; ++j)
                if (d_[j] < 0) { enter = j; break; }
            if (enter == kNoCol) return true;
            std::size_t leave = kNoCol;
            Rational best;
            for (std::size_t i = 0; i < nrows_; ++i) {
                if (!live_[i] || a_[i][enter] <= 0) continue;
                Rational ratio = b_[i] / a_[i][enter];
                if (leave == kNoCol || ratio < best ||
                    (ratio == best && basis_[i] < basis_[leave])) {
                    best = ratio;
                    leave = i;
                }
            }
            if (leave == kNoCol) return false;  // unbounded in this column
            pivot(leave, enter);
        }
    }

    void pivot(std::size_t r, std::size_t j) {
        const Rational piv = a_[r][j];
        for (auto& x : a_[r]) x /= piv;
        b_[r] /= piv;
        for (std::size_t i = 0; i < nrows_; ++i) {
            if (i == r || !live_[i] || a_[i][j] == 0) continue;
            const Rational f = a_[i][j];
            for (std::size_t k = 0; k < total_; ++k)
                if (a_[r][k] != 0) a_[i][k] -= f * a_[r][k];
            b_[i] -= f * b_[r];
        }
        if (d_[j] != 0) {
            const Rational f = d_[j];
            obj_ += f * b_[r];
            for (std::size_t k = 0; k < total_; ++k)
                if (a_[r][k] != 0) d_[k] -= f * a_[r][k];
        }
        basis_[r] = j;
    }

    std::size_t nvars_, nrows_, art_base_ = 0, total_ = 0;
    std::vector<std::size_t> pos_col_, neg_col_, slack_col_, basis_;
    std::vector<Rational> sign_;
    std::vector<bool> live_;
    Mat a_;
    Vec b_, d_;
    Rational obj_;
};

} // namespace detail

// Extended entry point: per-variable nonnegativity lets geometric callers
// avoid sign-splitting large coefficient blocks. The public contract below
// treats every variable as free.
inline LPResult solve_lp(int num_vars, const std::vector<LPRow>& rows,
                         const std::optional<Vec>& objective, ObjSense sense,
                         const std::vector<bool>& nonneg) {
    detail::Simplex s(num_vars, rows, nonneg);
    LPResult res;
    if (!s.phase1(res.farkas)) {
        res.status = LPStatus::Infeasible;
        return res;
    }
    if (objective) {
        if (objective->size() != static_cast<std::size_t>(num_vars))
            throw InputError("lp: objective dimension mismatch");
        if (!s.phase2(*objective, sense)) {
            res.status = LPStatus::Unbounded;
            return res;
        }
        res.value = (sense == ObjSense::Maximize) ? Rational(-s.objective_value())
                                                  : s.objective_value();
    } else {
        res.value = 0;
    }
    res.status = LPStatus::Optimal;
    res.solution.resize(static_cast<std::size_t>(num_vars));
    for (int j = 0; j < num_vars; ++j)
        res.solution[static_cast<std::size_t>(j)] = s.var_value(static_cast<std::size_t>(j));
    return res;
}

inline LPResult solve_lp(const LinearProgram& lp) {
    return solve_lp(lp.num_vars, lp.rows, lp.objective, lp.sense,
                    std::vector<bool>(static_cast<std::size_t>(lp.num_vars), false));
}

// One-matrix-multiply verification of an infeasibility certificate for a
// free-variable program: multipliers nonnegative on <= rows, aggregated
// coefficient functional identically zero, aggregated rhs negative.
inline bool verify_farkas(const LinearProgram& lp, const Vec& u) {
    if (u.size() != lp.rows.size()) return false;
    Vec g = vzero(static_cast<std::size_t>(lp.num_vars));
    Rational rhs = 0;
    for (std::size_t k = 0; k < lp.rows.size(); ++k) {
        if (lp.rows[k].sense == RowSense::LE && u[k] < 0) return false;
        g = vadd(g, vscale(u[k], lp.rows[k].coeffs));
        rhs += u[k] * lp.rows[k].rhs;
    }
    return is_zero(g) && rhs < 0;
}

enum class HullMode { Convex, Conic };

// On failure the separator satisfies <separator, v_i> <= separator_rhs for
// every generator and <separator, point> = separator_rhs + 1 (conic mode
// has separator_rhs = 0).
struct HullResult {
    bool member = false;
    Vec coefficients;
    Vec separator;
    Rational separator_rhs;
};

inline HullResult hull_membership(const Vec& point, const std::vector<Vec>& generators,
                                  HullMode mode) {
    if (generators.empty()) throw InputError("hull_membership: empty generator list");
    const std::size_t n = point.size();
    if (n == 0) throw InputError("hull_membership: zero-dimensional point");
    for (const auto& g : generators)
        if (g.size() != n) throw InputError("hull_membership: generator dimension mismatch");

    const std::size_t g = generators.size();
    std::vector<LPRow> rows;
    rows.reserve(n + 1);
    for (std::size_t r = 0; r < n; ++r) {
        LPRow row;
        row.coeffs.resize(g);
        for (std::size_t i = 0; i < g; ++i) row.coeffs[i] = generators[i][r];
        row.rhs = point[r];
        row.sense = RowSense::EQ;
        rows.push_back(std::move(row));
    }
    if (mode == HullMode::Convex) {
        LPRow row;
        row.coeffs.assign(g, Rational(1));
        row.rhs = 1;
        row.sense = RowSense::EQ;
        rows.push_back(std::move(row));
    }
    LPResult lp = solve_lp(static_cast<int>(g), rows, std::nullopt, ObjSense::Maximize,
                           std::vector<bool>(g, true));
    HullResult out;
    if (lp.status == LPStatus::Optimal) {
        out.member = true;
        out.coefficients = lp.solution;
        return out;
    }
    // farkas u: sum_r u_r v_i[r] (+ u_n) >= 0 and <u, (point,1)> = -1.
    out.member = false;
    out.separator.resize(n);
    for (std::size_t r = 0; r < n; ++r) out.separator[r] = -lp.farkas[r];
    out.separator_rhs = (mode == HullMode::Convex) ? lp.farkas[n] : Rational(0);
    return out;
}

} // namespace optcert
