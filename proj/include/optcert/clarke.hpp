#pragma once

// Generalized gradients for the locally Lipschitz fragment built from finite
// max/min of smooth branches, sums, and scalar multiples. Each computed set
// carries an exactness tag: max/min of C1 branches and scalar multiples are
// exact (max of C1 is regular, and c*S is exact for any sign of c), while the
// sum rule only guarantees an inclusion, so sums are tagged as possible
// over-approximations and certificate checks degrade accordingly.

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "optcert/certificate.hpp"
#include "optcert/expr.hpp"
#include "optcert/geometry.hpp"
#include "optcert/multiplier_search.hpp"
#include "optcert/rational.hpp"

namespace optcert {

enum class ClarkeExactness { RegularEquality, InclusionOverapprox };

struct ClarkeGradient {
    VPolytope set;
    ClarkeExactness exactness = ClarkeExactness::RegularEquality;
};

namespace detail {

inline Vec smooth_branch_gradient(const Expr& e, const Vec& x) {
    auto g = gradient(e, x);
    if (!g.exact)
        throw InputError(
            "not in Clarke fragment: branch gradient is not exact-rational (exp on path)");
    return g.grad;
}

} // namespace detail

inline ClarkeGradient clarke_subdifferential(const Expr& e, const Vec& x) {
    if (is_smooth_fragment(e))
        return {singleton(detail::smooth_branch_gradient(e, x)),
                ClarkeExactness::RegularEquality};
    switch (e->kind) {
        case ExprKind::Max:
        case ExprKind::Min: {
            const bool is_max = e->kind == ExprKind::Max;
            std::vector<Scalar> vals;
            for (const auto& b : e->args) {
                if (!is_smooth_fragment(b))
                    throw InputError("not in Clarke fragment: max/min branch is not smooth");
                vals.push_back(eval(b, x));
            }
            std::size_t best = 0;
            for (std::size_t i = 1; i < vals.size(); ++i) {
                const int c = cmp(vals[i], vals[best]);
                if ((is_max && c > 0) || (!is_max && c < 0)) best = i;
            }
            std::vector<VPolytope> grads;
            for (std::size_t i = 0; i < vals.size(); ++i)
                if (cmp(vals[i], vals[best]) == 0)
                    grads.push_back(singleton(detail::smooth_branch_gradient(e->args[i], x)));
            // min f = -max(-f), and both reductions land on the hull of the
            // active branch gradients.
            return {hull_union(grads), ClarkeExactness::RegularEquality};
        }
        case ExprKind::Abs: {
            // |u| = max(u, -u)
            if (!is_smooth_fragment(e->args[0]))
                throw InputError("not in Clarke fragment: abs of a non-smooth expression");
            const Scalar v = eval(e->args[0], x);
            const Vec g = detail::smooth_branch_gradient(e->args[0], x);
            const int s = sign_of(v);
            if (s > 0) return {singleton(g), ClarkeExactness::RegularEquality};
            if (s < 0) return {singleton(vneg(g)), ClarkeExactness::RegularEquality};
            return {hull_union({singleton(g), singleton(vneg(g))}),
                    ClarkeExactness::RegularEquality};
        }
        case ExprKind::ScalarMult: {
            auto inner = clarke_subdifferential(e->args[0], x);
            return {scale(e->coeff, inner.set), inner.exactness};
        }
        case ExprKind::Sum: {
            VPolytope acc;
            bool first = true;
            for (const auto& a : e->args) {
                auto part = clarke_subdifferential(a, x);
                acc = first ? part.set : minkowski_sum(acc, part.set);
                first = false;
            }
            return {acc, ClarkeExactness::InclusionOverapprox};
        }
        default: throw InputError("not in Clarke fragment");
    }
}

inline Rational clarke_directional(const ClarkeGradient& g, const Vec& d) {
    return support_value(g.set, d);
}

// Sampled estimate of the generalized directional derivative: the limsup of
// (f(y + t v) - f(y)) / t over y -> x, t -> 0+. Per scale t = 2^-k,
// k = 8..24, the quotient is maximized over y = x + t*u for the axis
// directions, +-v, u = 0, and 64 seeded random box directions. The estimate
// is the best quotient seen over the final 8 scales; heuristic evidence, not
// certificate arithmetic.
inline DirDeriv fo_numeric(const Expr& e, const Vec& x, const Vec& v) {
    require_dim(v, x.size(), "direction");
    const std::size_t n = x.size();
    std::mt19937_64 gen(0x6f6e756d65726963ULL);  // fixed probe seed
    std::vector<Quad> best_per_scale;
    for (int k = 8; k <= 24; ++k) {
        const Rational t(Int(1), Int(1) << k);
        std::vector<Vec> offsets;
        offsets.push_back(vzero(n));
        for (std::size_t i = 0; i < n; ++i) {
            Vec ei = vzero(n);
            ei[i] = 1;
            offsets.push_back(ei);
            offsets.push_back(vneg(ei));
        }
        if (!is_zero(v)) {
            const Rational vn = sup_norm(v);
            offsets.push_back(vscale(Rational(1) / vn, v));
            offsets.push_back(vscale(Rational(-1) / vn, v));
        }
        for (int r = 0; r < 64; ++r) {
            Vec u(n);
            for (auto& c : u)
                c = Rational(static_cast<long>(gen() % 2001) - 1000, 1000);
            const Rational un = sup_norm(u);
            if (un == 0) continue;
            offsets.push_back(vscale(Rational(1) / un, u));
        }
        bool have = false;
        Quad best = 0;
        for (const auto& u : offsets) {
            const Vec y = vadd(x, vscale(t, u));
            const Scalar fy = eval(e, y);
            const Scalar fyt = eval(e, vadd(y, vscale(t, v)));
            const Quad q = (fyt - fy).quad() / to_quad(t);
            if (!have || q > best) best = q;
            have = true;
        }
        best_per_scale.push_back(best);
    }
    DirDeriv out;
    Quad lo = best_per_scale.back(), hi = best_per_scale.back();
    for (std::size_t i = best_per_scale.size() - 8; i < best_per_scale.size(); ++i) {
        if (best_per_scale[i] < lo) lo = best_per_scale[i];
        if (best_per_scale[i] > hi) hi = best_per_scale[i];
    }
    out.estimate = static_cast<double>(hi);
    out.stability = static_cast<double>(hi - lo);
    return out;
}

// Fritz-John multipliers over Clarke generalized gradients; the search is
// the convex one with generalized gradients in place of subdifferentials.
// A failed search over sets that include an over-approximation proves
// nothing and is reported inconclusive.
inline Certificate fritz_john_lipschitz(const Program& prob, const Vec& xstar) {
    require_dim(xstar, prob.dim, "query point");
    for (std::size_t i = 0; i < prob.ineqs.size(); ++i)
        if (sign_of(eval(prob.ineqs[i], xstar)) > 0)
            throw PreconditionError("fritz_john_lipschitz: x* violates inequality " +
                                    std::to_string(i));
    for (std::size_t j = 0; j < prob.eqs.size(); ++j)
        if (sign_of(eval(prob.eqs[j], xstar)) != 0)
            throw PreconditionError("fritz_john_lipschitz: x* violates equality " +
                                    std::to_string(j));

    FJSearchInput in;
    in.dim = prob.dim;
    in.num_ineqs = prob.ineqs.size();
    auto obj = clarke_subdifferential(prob.objective, xstar);
    in.overapprox = obj.exactness == ClarkeExactness::InclusionOverapprox;
    in.sets.push_back(obj.set);
    for (std::size_t i = 0; i < prob.ineqs.size(); ++i) {
        auto sub = clarke_subdifferential(prob.ineqs[i], xstar);
        if (sign_of(eval(prob.ineqs[i], xstar)) == 0) {
            in.sets.push_back(sub.set);
            in.active.push_back(i);
            in.overapprox =
                in.overapprox || sub.exactness == ClarkeExactness::InclusionOverapprox;
        }
    }
    for (const auto& h : prob.eqs) {
        auto sub = clarke_subdifferential(h, xstar);
        in.eq_sets.push_back(sub.set);
        in.overapprox =
            in.overapprox || sub.exactness == ClarkeExactness::InclusionOverapprox;
    }
    return fj_multiplier_search(in);
}

} // namespace optcert
