#pragma once

// Quasidifferentials: a first-order description of f at x as a PAIR of
// convex polytopes [sub, super] with
//
//     f'(x; d) = max_{v in sub} <v, d>  +  min_{w in super} <w, d>.
//
// The pair calculus covers sums, arbitrary-sign scalar multiples, products,
// reciprocals, and pointwise max/min of quasidifferentiable pieces — in
// particular differences of convex functions, which neither the convex nor
// the Clarke machinery here accepts. All set arithmetic is exact and
// vertex-form; optimality checks reduce to polytope inclusion and small LPs.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "optcert/certificate.hpp"
#include "optcert/errors.hpp"
#include "optcert/expr.hpp"
#include "optcert/geometry.hpp"
#include "optcert/lp.hpp"
#include "optcert/multiplier_search.hpp"
#include "optcert/rational.hpp"

namespace optcert {

struct QuasiDifferential {
    VPolytope sub;    // "max" part
    VPolytope super;  // "min" part
    std::size_t dim() const { return sub.dim(); }
};

// --- pair calculus ----------------------------------------------------------

inline QuasiDifferential qd_add(const QuasiDifferential& a, const QuasiDifferential& b) {
    return {minkowski_sum(a.sub, b.sub), minkowski_sum(a.super, b.super)};
}

// Nonnegative scaling acts componentwise; negative scaling additionally swaps
// the roles of the two sets (max of c*S = c * min of S for c < 0).
inline QuasiDifferential qd_scale(const Rational& c, const QuasiDifferential& q) {
    if (c >= 0) return {scale(c, q.sub), scale(c, q.super)};
    return {scale(c, q.super), scale(c, q.sub)};
}

// Product rule: D(f1*f2)(x) = f1(x) D f2(x) + f2(x) D f1(x). The function
// values themselves scale the pairs, so they must be exact rationals.
inline QuasiDifferential qd_product(const Rational& f1_at_x, const Rational& f2_at_x,
                                    const QuasiDifferential& d1, const QuasiDifferential& d2) {
    return qd_add(qd_scale(f1_at_x, d2), qd_scale(f2_at_x, d1));
}

// Reciprocal rule: D(1/f1)(x) = -(1/f1(x)^2) D f1(x), undefined at f1(x) = 0.
inline QuasiDifferential qd_reciprocal(const Rational& f1_at_x, const QuasiDifferential& d1) {
    if (f1_at_x == 0) throw UndefinedError("reciprocal rule: function value is zero at the point");
    return qd_scale(Rational(-1) / (f1_at_x * f1_at_x), d1);
}

namespace detail {

inline Rational qd_exact_value(const Expr& e, const Vec& x, const char* rule) {
    Scalar s = eval(e, x);
    if (!s.exact())
        throw InputError(std::string(rule) +
                         " rule needs exact function values; this subexpression is float-tagged");
    return s.rat();
}

// Pointwise-max rule on precomputed branch values and pairs:
//   super(max) = sum of super_k over active k,
//   sub(max)   = hull over active k of ( sub_k + sum_{i active, i != k} (-super_i) ).
inline QuasiDifferential qd_max_rule(const std::vector<Rational>& vals,
                                     const std::vector<QuasiDifferential>& qds,
                                     std::size_t dim) {
    Rational best = vals[0];
    for (const auto& v : vals)
        if (v > best) best = v;
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < vals.size(); ++k)
        if (vals[k] == best) active.push_back(k);

    VPolytope super = singleton(vzero(dim));
    for (std::size_t k : active) super = minkowski_sum(super, qds[k].super);

    std::vector<VPolytope> parts;
    for (std::size_t k : active) {
        VPolytope p = qds[k].sub;
        for (std::size_t i : active) {
            if (i == k) continue;
            p = minkowski_sum(p, scale(Rational(-1), qds[i].super));
        }
        parts.push_back(std::move(p));
    }
    return {hull_union(parts), std::move(super)};
}

} // namespace detail

// Quasidifferential of an expression at a point. Smooth subtrees collapse to
// [{grad}, {0}]; abs/max/min/sum/scale/product/reciprocal compose by the pair
// calculus. Piecewise definitions are outside this fragment.
inline QuasiDifferential qd_of_expr(const Expr& e, const Vec& x) {
    const auto n = x.size();
    if (is_smooth_fragment(e)) {
        auto g = gradient(e, x);
        if (!g.exact)
            throw InputError(
                "quasidifferential fragment needs exact gradients; exp makes this subexpression "
                "float-tagged");
        return {singleton(g.grad), singleton(vzero(n))};
    }
    switch (e->kind) {
        case ExprKind::Sum: {
            QuasiDifferential acc = qd_of_expr(e->args[0], x);
            for (std::size_t i = 1; i < e->args.size(); ++i)
                acc = qd_add(acc, qd_of_expr(e->args[i], x));
            return acc;
        }
        case ExprKind::ScalarMult:
            return qd_scale(e->coeff, qd_of_expr(e->args[0], x));
        case ExprKind::Product: {
            const Rational v0 = detail::qd_exact_value(e->args[0], x, "product");
            const Rational v1 = detail::qd_exact_value(e->args[1], x, "product");
            return qd_product(v0, v1, qd_of_expr(e->args[0], x), qd_of_expr(e->args[1], x));
        }
        case ExprKind::Reciprocal: {
            const Rational v = detail::qd_exact_value(e->args[0], x, "reciprocal");
            return qd_reciprocal(v, qd_of_expr(e->args[0], x));
        }
        case ExprKind::Abs: {
            // |u| = max(u, -u). The branch -u is negated as an expression, not
            // as a pair, so a smooth u yields two [{grad},{0}] atoms and the
            // max rule produces the canonical representative.
            const Rational v = detail::qd_exact_value(e->args[0], x, "abs");
            QuasiDifferential qu = qd_of_expr(e->args[0], x);
            QuasiDifferential qneg = qd_of_expr(scalar_mult(Rational(-1), e->args[0]), x);
            return detail::qd_max_rule({v, -v}, {std::move(qu), std::move(qneg)}, n);
        }
        case ExprKind::Max: {
            std::vector<Rational> vals;
            std::vector<QuasiDifferential> qds;
            for (const auto& a : e->args) {
                vals.push_back(detail::qd_exact_value(a, x, "max"));
                qds.push_back(qd_of_expr(a, x));
            }
            return detail::qd_max_rule(vals, qds, n);
        }
        case ExprKind::Min: {
            // min f_k = -max(-f_k); the inner branches are negated as
            // expressions, only the outer negation uses the pair swap.
            std::vector<Rational> vals;
            std::vector<QuasiDifferential> qds;
            for (const auto& a : e->args) {
                vals.push_back(-detail::qd_exact_value(a, x, "min"));
                qds.push_back(qd_of_expr(scalar_mult(Rational(-1), a), x));
            }
            return qd_scale(Rational(-1), detail::qd_max_rule(vals, qds, n));
        }
        default:
            throw InputError("expression is not in the quasidifferentiable fragment");
    }
}

// Exact one-sided directional derivative encoded by the pair:
// f'(x; d) = support(sub, d) + min over super = support(sub, d) - support(-super, d).
inline Rational qd_directional(const QuasiDifferential& q, const Vec& d) {
    return support_value(q.sub, d) - support_value(scale(Rational(-1), q.super), d);
}

// Unconstrained stationarity: f'(x; d) >= 0 for all d  <=>  -super subset sub.
inline bool qd_unconstrained_check(const QuasiDifferential& q) {
    return polytope_contains(q.sub, scale(Rational(-1), q.super)).contained;
}

namespace detail {

struct QdProblemAtPoint {
    std::vector<std::size_t> indices;     // 0 = objective, i >= 1 = inequality i
    std::vector<QuasiDifferential> qds;   // parallel to indices
};

// Shared front end of the constrained checks: exact feasibility, active-set
// detection, and the quasidifferential of the objective and each active
// constraint. Equality constraints are not part of this calculus.
inline QdProblemAtPoint qd_problem_at_point(const Program& prob, const Vec& xstar) {
    if (!prob.eqs.empty())
        throw InputError("quasidifferential checks do not accept equality constraints");
    require_dim(xstar, prob.dim, "x*");
    QdProblemAtPoint out;
    out.indices.push_back(0);
    out.qds.push_back(qd_of_expr(prob.objective, xstar));
    for (std::size_t i = 0; i < prob.ineqs.size(); ++i) {
        const int s = sign_of(eval(prob.ineqs[i], xstar));
        if (s > 0)
            throw PreconditionError("x* violates inequality " + std::to_string(i));
        if (s == 0) {
            out.indices.push_back(i + 1);
            out.qds.push_back(qd_of_expr(prob.ineqs[i], xstar));
        }
    }
    return out;
}

} // namespace detail

// Inclusion form of the constrained first-order condition at a feasible x*:
//
//   -( super_0 + sum over active i of super_i )
//       subset  hull over k in {0} u I(x*) of ( sub_k + sum_{i != k} (-super_i) ).
//
// Necessary at a local minimizer; `offending_vertex` demonstrates failure.
struct QdInclusionResult {
    bool holds = false;
    std::optional<Vec> offending_vertex;
    VPolytope lhs;  // the negated superdifferential sum
    VPolytope rhs;  // the hull the inclusion is tested against
};

inline QdInclusionResult qd_constrained_check(const Program& prob, const Vec& xstar) {
    auto at = detail::qd_problem_at_point(prob, xstar);
    const std::size_t n = prob.dim;

    VPolytope super_sum = singleton(vzero(n));
    for (const auto& q : at.qds) super_sum = minkowski_sum(super_sum, q.super);

    std::vector<VPolytope> parts;
    for (std::size_t k = 0; k < at.qds.size(); ++k) {
        VPolytope p = at.qds[k].sub;
        for (std::size_t j = 0; j < at.qds.size(); ++j) {
            if (j == k) continue;
            p = minkowski_sum(p, scale(Rational(-1), at.qds[j].super));
        }
        parts.push_back(std::move(p));
    }

    QdInclusionResult out;
    out.lhs = scale(Rational(-1), super_sum);
    out.rhs = hull_union(parts);
    auto c = polytope_contains(out.rhs, out.lhs);
    out.holds = c.contained;
    if (!c.contained) out.offending_vertex = c.offending_vertex;
    return out;
}

// Weakened Fritz-John condition: for EVERY choice of one vertex w_i from each
// superdifferential (i ranging over the objective and the active
// inequalities), there must be multipliers lambda >= 0, sum = 1, with
//
//   0 in sum_i lambda_i ( sub_i + w_i ).
//
// Enumerating vertices makes the universal quantifier finite: a failing tuple
// refutes outright, while success is certified on that finite witness set.
inline Certificate qd_weakened_fj(const Program& prob, const Vec& xstar) {
    auto at = detail::qd_problem_at_point(prob, xstar);
    const std::size_t m = prob.ineqs.size();
    const std::size_t p = at.qds.size();

    std::size_t tuple_count = 1;
    for (const auto& q : at.qds) {
        tuple_count *= q.super.vertices.size();
        if (tuple_count > (std::size_t{1} << 14))
            throw InputError("superdifferential vertex tuples exceed 16384; refusing enumeration");
    }

    const std::string base_normalization =
        "multipliers over the objective and active inequalities sum to 1; ties broken by "
        "minimizing lambda_0; verified on the finite set of superdifferential vertex tuples";
    Certificate cert;
    cert.normalization = base_normalization;

    bool first_tuple = true;
    for (std::size_t t = 0; t < tuple_count; ++t) {
        std::vector<Vec> w(p);
        {
            std::size_t rem = t;
            for (std::size_t i = 0; i < p; ++i) {
                const std::size_t sz = at.qds[i].super.vertices.size();
                w[i] = at.qds[i].super.vertices[rem % sz];
                rem /= sz;
            }
        }
        std::vector<VPolytope> sets;
        for (std::size_t i = 0; i < p; ++i)
            sets.push_back(minkowski_sum(at.qds[i].sub, singleton(w[i])));
        auto res = vertex_combination_search(sets, {}, 0);
        if (!res.feasible) {
            Certificate fails;
            fails.status = CertStatus::Fails;
            fails.refutation = res.separator;
            for (std::size_t i = 0; i < p; ++i) fails.witnesses.emplace_back(at.indices[i], w[i]);
            fails.normalization =
                base_normalization +
                "; fails at the superdifferential vertex tuple recorded in witnesses";
            fails.lambda = vzero(m + 1);
            fails.mu = {};
            return fails;
        }
        if (first_tuple) {
            first_tuple = false;
            cert.status = CertStatus::Holds;
            cert.lambda = vzero(m + 1);
            for (std::size_t i = 0; i < p; ++i)
                cert.lambda[at.indices[i]] = res.convex_sums[i];
            cert.mu = {};
            Vec recombined = vzero(prob.dim);
            for (std::size_t i = 0; i < p; ++i) {
                if (res.convex_sums[i] == 0) continue;
                cert.witnesses.emplace_back(at.indices[i], res.convex_points[i]);
                recombined = vadd(recombined, vscale(res.convex_sums[i], res.convex_points[i]));
            }
            if (!is_zero(recombined))
                throw Error("weakened FJ: internal error, certificate does not recombine to zero");
            cert.normalization +=
                "; reported multipliers are for the first vertex tuple; witnesses lie in "
                "sub_i + w_i for that tuple";
        }
    }
    return cert;
}

// Regularity condition: a direction r_hat (boxed to |r_hat_k| <= 1) along
// which every active constraint strictly descends in the quasidifferential
// sense:
//
//   max_{v in sub_i} <v, r_hat> + max_{w in super_i} <w, r_hat> < 0
//   for every active i.
//
// Encoded as an LP maximizing the common slack t; the condition holds iff the
// optimum is positive. When it holds, every weakened-FJ vertex tuple must
// admit multipliers with lambda_0 > 0; `fj_lambda0_positive` records that
// cross-check.
struct RCResult {
    bool rc = false;
    bool vacuous = false;  // no active constraints
    Vec r_hat;
    Rational t = 0;
    bool fj_lambda0_positive = false;
};

inline RCResult qd_regularity_rc(const Program& prob, const Vec& xstar) {
    auto at = detail::qd_problem_at_point(prob, xstar);
    const std::size_t n = prob.dim;
    std::vector<std::size_t> act;  // positions in at.* of the active constraints
    for (std::size_t i = 1; i < at.indices.size(); ++i) act.push_back(i);

    RCResult out;
    if (act.empty()) {
        out.rc = true;
        out.vacuous = true;
        out.r_hat = vzero(n);
        out.t = 0;
        out.fj_lambda0_positive = true;  // checked below over the objective-only tuples
    } else {
        // Variables: r (n, free), a_i and b_i per active constraint (free),
        // t (free). Maximize t subject to
        //   <v, r> <= a_i  for v in sub_i,   <w, r> <= b_i  for w in super_i,
        //   a_i + b_i + t <= 0,   |r_k| <= 1.
        const std::size_t p = act.size();
        const std::size_t num_vars = n + 2 * p + 1;
        const std::size_t t_col = n + 2 * p;
        std::vector<LPRow> rows;
        for (std::size_t s = 0; s < p; ++s) {
            const auto& q = at.qds[act[s]];
            for (const auto& v : q.sub.vertices) {
                LPRow row;
                row.coeffs = vzero(num_vars);
                for (std::size_t k = 0; k < n; ++k) row.coeffs[k] = v[k];
                row.coeffs[n + 2 * s] = -1;
                row.rhs = 0;
                row.sense = RowSense::LE;
                rows.push_back(std::move(row));
            }
            for (const auto& w : q.super.vertices) {
                LPRow row;
                row.coeffs = vzero(num_vars);
                for (std::size_t k = 0; k < n; ++k) row.coeffs[k] = w[k];
                row.coeffs[n + 2 * s + 1] = -1;
                row.rhs = 0;
                row.sense = RowSense::LE;
                rows.push_back(std::move(row));
            }
            LPRow slack;
            slack.coeffs = vzero(num_vars);
            slack.coeffs[n + 2 * s] = 1;
            slack.coeffs[n + 2 * s + 1] = 1;
            slack.coeffs[t_col] = 1;
            slack.rhs = 0;
            slack.sense = RowSense::LE;
            rows.push_back(std::move(slack));
        }
        for (std::size_t k = 0; k < n; ++k) {
            LPRow up, down;
            up.coeffs = vzero(num_vars);
            up.coeffs[k] = 1;
            up.rhs = 1;
            up.sense = RowSense::LE;
            rows.push_back(std::move(up));
            down.coeffs = vzero(num_vars);
            down.coeffs[k] = -1;
            down.rhs = 1;
            down.sense = RowSense::LE;
            rows.push_back(std::move(down));
        }
        Vec objective = vzero(num_vars);
        objective[t_col] = 1;
        auto lp = solve_lp(static_cast<int>(num_vars), rows, objective, ObjSense::Maximize,
                           std::vector<bool>(num_vars, false));
        if (lp.status != LPStatus::Optimal)
            throw Error("regularity LP: expected an optimum (feasible and bounded by the box)");
        out.t = lp.value;
        out.rc = out.t > 0;
        out.r_hat = vzero(n);
        for (std::size_t k = 0; k < n; ++k) out.r_hat[k] = lp.solution[k];
    }

    if (out.rc) {
        // Cross-check: with regularity, every superdifferential vertex tuple
        // must admit multipliers whose lambda_0 is positive. Re-run the tuple
        // search maximizing the objective's share.
        const std::size_t p = at.qds.size();
        std::size_t tuple_count = 1;
        for (const auto& q : at.qds) tuple_count *= q.super.vertices.size();
        bool all_positive = tuple_count > 0;
        for (std::size_t t = 0; t < tuple_count; ++t) {
            std::vector<Vec> w(p);
            std::size_t rem = t;
            for (std::size_t i = 0; i < p; ++i) {
                const std::size_t sz = at.qds[i].super.vertices.size();
                w[i] = at.qds[i].super.vertices[rem % sz];
                rem /= sz;
            }
            std::vector<VPolytope> sets;
            for (std::size_t i = 0; i < p; ++i)
                sets.push_back(minkowski_sum(at.qds[i].sub, singleton(w[i])));
            auto res = vertex_combination_search(sets, {}, 0, ObjSense::Maximize);
            if (!res.feasible || res.convex_sums[0] == 0) {
                all_positive = false;
                break;
            }
        }
        out.fj_lambda0_positive = all_positive;
    }
    return out;
}

} // namespace optcert
