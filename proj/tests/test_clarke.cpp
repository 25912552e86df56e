#include <catch2/catch_amalgamated.hpp>

#include "optcert/clarke.hpp"

#include "cert_check.hpp"
#include "test_support.hpp"

using namespace optcert;

namespace {

Vec rvec(std::initializer_list<Rational> xs) { return Vec(xs); }

Expr affine_expr(const Vec& a, const Rational& b) {
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0) terms.push_back(scalar_mult(a[i], variable(i)));
    terms.push_back(constant(b));
    return sum(std::move(terms));
}

// affine + diagonal quadratic branch: a.x + b + sum_i d_i x_i^2
Expr quad_branch(const Vec& a, const Rational& b, const Vec& d) {
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0) terms.push_back(scalar_mult(a[i], variable(i)));
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] != 0) terms.push_back(scalar_mult(d[i], power(variable(i), 2)));
    terms.push_back(constant(b));
    return sum(std::move(terms));
}

// ---- interval arithmetic on polynomial branches (test-side oracle) --------

struct IV {
    Rational lo, hi;
};

IV iv_const(const Rational& c) { return {c, c}; }
IV iv_add(const IV& a, const IV& b) { return {a.lo + b.lo, a.hi + b.hi}; }
IV iv_scale(const Rational& c, const IV& a) {
    return c >= 0 ? IV{c * a.lo, c * a.hi} : IV{c * a.hi, c * a.lo};
}
IV iv_mul(const IV& a, const IV& b) {
    const Rational p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    IV out{p1, p1};
    for (const Rational& p : {p2, p3, p4}) {
        if (p < out.lo) out.lo = p;
        if (p > out.hi) out.hi = p;
    }
    return out;
}

struct IGrad {
    IV val;
    std::vector<IV> partial;
};

IGrad igrad(const Expr& e, const std::vector<IV>& box) {
    const std::size_t n = box.size();
    switch (e->kind) {
        case ExprKind::Constant:
            return {iv_const(e->constant), std::vector<IV>(n, iv_const(0))};
        case ExprKind::Variable: {
            IGrad g{box[e->var_index], std::vector<IV>(n, iv_const(0))};
            g.partial[e->var_index] = iv_const(1);
            return g;
        }
        case ExprKind::Sum: {
            IGrad acc = igrad(e->args[0], box);
            for (std::size_t i = 1; i < e->args.size(); ++i) {
                IGrad t = igrad(e->args[i], box);
                acc.val = iv_add(acc.val, t.val);
                for (std::size_t j = 0; j < n; ++j)
                    acc.partial[j] = iv_add(acc.partial[j], t.partial[j]);
            }
            return acc;
        }
        case ExprKind::ScalarMult: {
            IGrad t = igrad(e->args[0], box);
            t.val = iv_scale(e->coeff, t.val);
            for (auto& p : t.partial) p = iv_scale(e->coeff, p);
            return t;
        }
        case ExprKind::Product: {
            IGrad a = igrad(e->args[0], box);
            IGrad b = igrad(e->args[1], box);
            IGrad out{iv_mul(a.val, b.val), std::vector<IV>(n)};
            for (std::size_t j = 0; j < n; ++j)
                out.partial[j] =
                    iv_add(iv_mul(a.val, b.partial[j]), iv_mul(b.val, a.partial[j]));
            return out;
        }
        case ExprKind::Power: {
            IGrad t = igrad(e->args[0], box);
            IV valpow = t.val;
            IV deriv = iv_const(e->exponent);
            for (int i = 1; i < e->exponent; ++i) {
                deriv = iv_mul(deriv, t.val);
                valpow = iv_mul(valpow, t.val);
            }
            // the loop above multiplies deriv by val^(k-1)
            IGrad out{valpow, std::vector<IV>(n)};
            for (std::size_t j = 0; j < n; ++j) out.partial[j] = iv_mul(deriv, t.partial[j]);
            return out;
        }
        default: FAIL("interval oracle: unsupported node");
    }
    return {};
}

// Sup-norm Lipschitz bound for a max-of-smooth expression on the unit box
// around x, from interval bounds on every branch gradient.
Rational lipschitz_bound(const std::vector<Expr>& branches, const Vec& x) {
    std::vector<IV> box;
    for (const auto& xi : x) box.push_back({xi - 1, xi + 1});
    Rational best = 0;
    for (const auto& b : branches) {
        IGrad g = igrad(b, box);
        for (const auto& p : g.partial) {
            const Rational mag = std::max(p.lo < 0 ? Rational(-p.lo) : p.lo,
                                          p.hi < 0 ? Rational(-p.hi) : p.hi);
            if (mag > best) best = mag;
        }
    }
    return best;
}

} // namespace

TEST_CASE("generalized gradients of max-of-smooth expressions") {
    SECTION("|x| as max(x, -x) at the kink") {
        auto e = max_of({variable(0), scalar_mult(Rational(-1), variable(0))});
        auto g = clarke_subdifferential(e, rvec({Rational(0)}));
        REQUIRE(g.exactness == ClarkeExactness::RegularEquality);
        REQUIRE(polytope_set_equal(g.set,
                                   VPolytope{{rvec({Rational(-1)}), rvec({Rational(1)})}}));
    }
    SECTION("scalar rule with a negative factor") {
        auto e = scalar_mult(Rational(-1),
                             max_of({variable(0), scalar_mult(Rational(-1), variable(0))}));
        auto g = clarke_subdifferential(e, rvec({Rational(0)}));
        REQUIRE(g.exactness == ClarkeExactness::RegularEquality);
        REQUIRE(polytope_set_equal(g.set,
                                   VPolytope{{rvec({Rational(-1)}), rvec({Rational(1)})}}));
    }
    SECTION("mixed curvature branches") {
        auto e = max_of({power(variable(0), 2), scalar_mult(Rational(-1), variable(0))});
        auto g = clarke_subdifferential(e, rvec({Rational(0)}));
        REQUIRE(polytope_set_equal(g.set,
                                   VPolytope{{rvec({Rational(0)}), rvec({Rational(-1)})}}));
    }
    SECTION("min via the same reduction") {
        auto e = min_of({variable(0), scalar_mult(Rational(-1), variable(0))});
        auto g = clarke_subdifferential(e, rvec({Rational(0)}));
        REQUIRE(polytope_set_equal(g.set,
                                   VPolytope{{rvec({Rational(-1)}), rvec({Rational(1)})}}));
    }
    SECTION("sums are tagged as possible over-approximations") {
        auto e = sum({max_of({variable(0), scalar_mult(Rational(-1), variable(0))}),
                      scalar_mult(Rational(2), variable(0))});
        auto g = clarke_subdifferential(e, rvec({Rational(0)}));
        REQUIRE(g.exactness == ClarkeExactness::InclusionOverapprox);
        REQUIRE(polytope_set_equal(g.set,
                                   VPolytope{{rvec({Rational(1)}), rvec({Rational(3)})}}));
    }
    SECTION("fragment rejection") {
        REQUIRE_THROWS_AS(
            clarke_subdifferential(max_of({abs_of(variable(0)), variable(0)}),
                                   rvec({Rational(0)})),
            InputError);
        Piece p{Guard{{LinCond{rvec({Rational(1)}), 0, Relation::GE}}}, variable(0)};
        REQUIRE_THROWS_AS(clarke_subdifferential(piecewise({p}), rvec({Rational(1)})),
                          InputError);
    }
}

TEST_CASE("support values of generalized gradients") {
    ClarkeGradient interval{VPolytope{{rvec({Rational(-1)}), rvec({Rational(1)})}},
                            ClarkeExactness::RegularEquality};
    REQUIRE(clarke_directional(interval, rvec({Rational(1)})) == 1);
    ClarkeGradient origin{singleton(rvec({Rational(0)})), ClarkeExactness::RegularEquality};
    REQUIRE(clarke_directional(origin, rvec({Rational(17)})) == 0);
    ClarkeGradient half{VPolytope{{rvec({Rational(-1)}), rvec({Rational(0)})}},
                        ClarkeExactness::RegularEquality};
    REQUIRE(clarke_directional(half, rvec({Rational(-1)})) == 1);
}

TEST_CASE("sampled generalized directional derivatives") {
    auto absx = max_of({variable(0), scalar_mult(Rational(-1), variable(0))});
    SECTION("|x| at 0") {
        auto d = fo_numeric(absx, rvec({Rational(0)}), rvec({Rational(1)}));
        REQUIRE(d.estimate == Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("-|x| at 0: the limsup sees the steep side") {
        auto e = scalar_mult(Rational(-1), absx);
        auto d = fo_numeric(e, rvec({Rational(0)}), rvec({Rational(1)}));
        REQUIRE(d.estimate == Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("smooth case reduces to the classical derivative") {
        auto d = fo_numeric(power(variable(0), 2), rvec({Rational(1)}), rvec({Rational(1)}));
        REQUIRE(d.estimate == Catch::Approx(2.0).margin(1e-4));
        REQUIRE(d.stability < 1e-4);
    }
}

TEST_CASE("Fritz-John certificates over generalized gradients") {
    SECTION("maximize |x| under a linear cap") {
        Program p;
        p.dim = 1;
        p.objective = scalar_mult(
            Rational(-1), max_of({variable(0), scalar_mult(Rational(-1), variable(0))}));
        p.ineqs = {affine_expr(rvec({Rational(1)}), -1)};  // x - 1 <= 0
        auto cert = fritz_john_lipschitz(p, rvec({Rational(1)}));
        REQUIRE(cert.status == CertStatus::Holds);
        REQUIRE(cert.lambda == rvec({Rational(1, 2), Rational(1, 2)}));
        certcheck::check_fj_certificate(cert, p, rvec({Rational(1)}));
    }
    SECTION("unconstrained minimum of |x|") {
        Program p;
        p.dim = 1;
        p.objective = max_of({variable(0), scalar_mult(Rational(-1), variable(0))});
        auto cert = fritz_john_lipschitz(p, rvec({Rational(0)}));
        REQUIRE(cert.status == CertStatus::Holds);
        REQUIRE(cert.lambda == rvec({Rational(1)}));
        certcheck::check_fj_certificate(cert, p, rvec({Rational(0)}));
    }
    SECTION("degenerate constraint absorbs all the weight") {
        Program p;
        p.dim = 1;
        p.objective = affine_expr(rvec({Rational(1)}), 0);
        p.ineqs = {max_of({variable(0), scalar_mult(Rational(-1), variable(0))})};  // |x| <= 0
        auto cert = fritz_john_lipschitz(p, rvec({Rational(0)}));
        REQUIRE(cert.status == CertStatus::Holds);
        REQUIRE(cert.lambda == rvec({Rational(0), Rational(1)}));
        certcheck::check_fj_certificate(cert, p, rvec({Rational(0)}));
    }
    SECTION("failure with exact sets is a refutation") {
        Program p;
        p.dim = 1;
        p.objective = max_of({variable(0), scalar_mult(Rational(2), variable(0))});
        auto cert = fritz_john_lipschitz(p, rvec({Rational(0)}));
        REQUIRE(cert.status == CertStatus::Fails);
        REQUIRE(cert.refutation);
        REQUIRE(dot(*cert.refutation, rvec({Rational(1)})) <= -1);
        REQUIRE(dot(*cert.refutation, rvec({Rational(2)})) <= -1);
    }
    SECTION("failure over an over-approximate set degrades to inconclusive") {
        Program p;
        p.dim = 1;
        p.objective = sum({max_of({variable(0), scalar_mult(Rational(-1), variable(0))}),
                           scalar_mult(Rational(2), variable(0))});
        auto cert = fritz_john_lipschitz(p, rvec({Rational(0)}));
        REQUIRE(cert.status == CertStatus::Inconclusive);
        REQUIRE_FALSE(cert.refutation);
    }
}

TEST_CASE("sampled limsup agrees with the support function at smooth points") {
    testsup::Rng rng(53);
    int agreements = 0;
    while (agreements < 100) {
        const std::size_t dim = rng.range(1, 3);
        const int nb = rng.range(2, 3);
        std::vector<Expr> branches;
        for (int b = 0; b < nb; ++b)
            branches.push_back(
                quad_branch(rng.vec(dim, 2, 2), rng.rational(2, 2), rng.vec(dim, 1, 2)));
        auto f = max_of(branches);
        // keep the probe ball clear of branch crossings: require a fat margin
        Vec x = rng.vec(dim, 2, 2);
        std::vector<Rational> vals;
        Rational top;
        for (std::size_t b = 0; b < branches.size(); ++b) {
            vals.push_back(eval(branches[b], x).rat());
            if (b == 0 || vals.back() > top) top = vals.back();
        }
        int near_top = 0;
        for (const auto& v : vals)
            if (top - v < Rational(1, 4)) ++near_top;
        if (near_top != 1) continue;

        auto g = clarke_subdifferential(f, x);
        REQUIRE_FALSE(g.set.vertices.empty());
        // Lipschitz bound on the unit box contains every vertex
        const Rational lip = lipschitz_bound(branches, x);
        for (const auto& v : g.set.vertices) REQUIRE(sup_norm(v) <= lip);

        Vec d = rng.vec(dim, 1, 2);
        const double support = static_cast<double>(clarke_directional(g, d));
        auto est = fo_numeric(f, x, d);
        REQUIRE(est.estimate <= support + 1e-4);
        REQUIRE(est.estimate == Catch::Approx(support).margin(1e-4));
        ++agreements;
    }
}

TEST_CASE("sampled limsup at a deliberate kink") {
    // three planes meeting at the origin; dominance regions are fat, so the
    // sampler finds the steepest quotient reliably
    auto f = max_of({affine_expr(rvec({Rational(1), Rational(1)}), 0),
                     affine_expr(rvec({Rational(-1), Rational(-1)}), 0),
                     affine_expr(rvec({Rational(1), Rational(-1)}), 0)});
    const Vec origin = rvec({Rational(0), Rational(0)});
    auto g = clarke_subdifferential(f, origin);
    testsup::Rng rng(59);
    for (int it = 0; it < 20; ++it) {
        Vec d = rng.vec(2, 2, 2);
        const double support = static_cast<double>(clarke_directional(g, d));
        auto est = fo_numeric(f, origin, d);
        REQUIRE(est.estimate <= support + 1e-4);
        REQUIRE(est.estimate == Catch::Approx(support).margin(1e-4));
    }
}

TEST_CASE("sum rule stays inside the Minkowski sum of the parts") {
    testsup::Rng rng(61);
    for (int it = 0; it < 40; ++it) {
        const std::size_t dim = rng.range(1, 2);
        auto mk = [&] {
            std::vector<Expr> branches;
            const int nb = rng.range(2, 3);
            for (int b = 0; b < nb; ++b)
                branches.push_back(
                    quad_branch(rng.vec(dim, 2, 2), rng.rational(2, 2), rng.vec(dim, 1, 2)));
            return max_of(std::move(branches));
        };
        auto fa = mk(), fb = mk();
        Vec x = rng.vec(dim, 2, 2);
        auto total = clarke_subdifferential(sum({fa, fb}), x);
        auto parts = minkowski_sum(clarke_subdifferential(fa, x).set,
                                   clarke_subdifferential(fb, x).set);
        REQUIRE(total.exactness == ClarkeExactness::InclusionOverapprox);
        REQUIRE(polytope_contains(parts, total.set).contained);
    }
}
