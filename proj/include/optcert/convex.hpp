#pragma once

// Subdifferential calculus for the structurally convex fragment: affine
// atoms, nonnegative scalar multiples, sums, finite max, and abs of affine.
// Convexity is certified by construction; anything else is rejected rather
// than analyzed. On this fragment every subdifferential is an exact
// V-polytope and the calculus rules (Minkowski sum, union hull over active
// branches) hold with equality.

#include <cstddef>
#include <string>
#include <vector>

#include "optcert/certificate.hpp"
#include "optcert/expr.hpp"
#include "optcert/geometry.hpp"
#include "optcert/lp.hpp"
#include "optcert/multiplier_search.hpp"
#include "optcert/rational.hpp"

namespace optcert {

inline VPolytope convex_subdifferential(const Expr& e, const Vec& x) {
    const std::size_t n = x.size();
    // Affine atoms first: this also absorbs negative scalar multiples and
    // constant*affine products, which stay convex.
    if (auto aff = as_affine(e, n)) return singleton(aff->first);
    switch (e->kind) {
        case ExprKind::Sum: {
            VPolytope acc = convex_subdifferential(e->args[0], x);
            for (std::size_t i = 1; i < e->args.size(); ++i)
                acc = minkowski_sum(acc, convex_subdifferential(e->args[i], x));
            return acc;
        }
        case ExprKind::ScalarMult: {
            if (e->coeff < 0)
                throw InputError(
                    "not certified convex: negative scalar multiple of a non-affine "
                    "expression");
            return scale(e->coeff, convex_subdifferential(e->args[0], x));
        }
        case ExprKind::Max: {
            std::vector<Rational> vals;
            vals.reserve(e->args.size());
            Rational best;
            for (std::size_t i = 0; i < e->args.size(); ++i) {
                // The fragment contains no exp node, so evaluation is exact.
                vals.push_back(eval(e->args[i], x).rat());
                if (i == 0 || vals.back() > best) best = vals.back();
            }
            std::vector<VPolytope> active;
            for (std::size_t i = 0; i < e->args.size(); ++i)
                if (vals[i] == best) active.push_back(convex_subdifferential(e->args[i], x));
            return hull_union(active);
        }
        case ExprKind::Abs: {
            auto aff = as_affine(e->args[0], n);
            if (!aff)
                throw InputError("not certified convex: abs of a non-affine expression");
            const Rational v = dot(aff->first, x) + aff->second;
            if (v > 0) return singleton(aff->first);
            if (v < 0) return singleton(vneg(aff->first));
            return hull_union({singleton(aff->first), singleton(vneg(aff->first))});
        }
        default:
            throw InputError("not certified convex: node outside the convex fragment");
    }
}

inline bool convex_stationarity(const Expr& e, const Vec& x) {
    const VPolytope sub = convex_subdifferential(e, x);
    return hull_membership(vzero(x.size()), sub.vertices, HullMode::Convex).member;
}

// Fritz-John multipliers for min f s.t. g_i <= 0, h_j = 0 with every function
// in the convex fragment: 0 in lambda_0*df(x*) + sum lambda_i*dg_i(x*) +
// sum mu_j*dh_j(x*), lambda >= 0 summing to 1 over the objective and active
// inequalities, lambda_i = 0 on inactive ones. Equality multipliers are
// unrestricted in sign; each sign pattern is tried as a separate LP (hence
// the cap on their number), with conic weights inside each pattern.
inline Certificate fritz_john_convex(const Program& prob, const Vec& xstar) {
    require_dim(xstar, prob.dim, "query point");
    // Exact feasibility; fragment validation happens in the subdifferential
    // calls below (inactive inequalities included).
    for (std::size_t i = 0; i < prob.ineqs.size(); ++i)
        if (eval(prob.ineqs[i], xstar).rat() > 0)
            throw PreconditionError("fritz_john_convex: x* violates inequality " +
                                    std::to_string(i));
    for (std::size_t j = 0; j < prob.eqs.size(); ++j)
        if (eval(prob.eqs[j], xstar).rat() != 0)
            throw PreconditionError("fritz_john_convex: x* violates equality " +
                                    std::to_string(j));

    std::vector<VPolytope> sets{convex_subdifferential(prob.objective, xstar)};
    std::vector<std::size_t> active;  // inequality index per set position >= 1
    for (std::size_t i = 0; i < prob.ineqs.size(); ++i) {
        const VPolytope sub = convex_subdifferential(prob.ineqs[i], xstar);
        if (eval(prob.ineqs[i], xstar).rat() == 0) {
            sets.push_back(sub);
            active.push_back(i);
        }
    }
    FJSearchInput in;
    in.dim = prob.dim;
    in.num_ineqs = prob.ineqs.size();
    in.sets = std::move(sets);
    in.active = std::move(active);
    for (const auto& h : prob.eqs) in.eq_sets.push_back(convex_subdifferential(h, xstar));
    return fj_multiplier_search(in);
}

} // namespace optcert
