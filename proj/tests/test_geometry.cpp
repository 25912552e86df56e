#include <catch2/catch_amalgamated.hpp>

#include "optcert/geometry.hpp"
#include "test_support.hpp"

using namespace optcert;
using testsup::Rng;

namespace {

Vec v2(int a, int b) { return {Rational(a), Rational(b)}; }

VPolytope poly(std::vector<Vec> vs) { return VPolytope(std::move(vs)); }

// A random point of cone(rays, lines) built as an explicit combination.
Vec random_cone_point(Rng& rng, const FGCone& c) {
    Vec p = vzero(c.dim);
    for (const auto& r : c.rays) p = vadd(p, vscale(Rational(rng.range(0, 3)), r));
    for (const auto& l : c.lines) p = vadd(p, vscale(rng.rational(3, 2), l));
    return p;
}

} // namespace

TEST_CASE("support function of simple polytopes") {
    const VPolytope square = poly({v2(1, 1), v2(1, -1), v2(-1, 1), v2(-1, -1)});
    CHECK(support_value(square, v2(1, 0)) == 1);
    CHECK(support_value(poly({v2(0, 0)}), v2(7, -3)) == 0);
    CHECK(support_value(poly({v2(2, 0), v2(0, 2)}), v2(1, 1)) == 2);
}

TEST_CASE("minkowski sum, scaling, hull union") {
    const VPolytope seg = poly({{Rational(-1)}, {Rational(1)}});
    CHECK(polytope_set_equal(minkowski_sum(seg, seg),
                             poly({{Rational(-2)}, {Rational(2)}})));
    const VPolytope scaled = scale(Rational(-1), poly({v2(1, 0), v2(0, 1)}));
    CHECK(polytope_set_equal(scaled, poly({v2(-1, 0), v2(0, -1)})));
    const VPolytope u = hull_union({poly({{Rational(0)}}), poly({{Rational(1)}})});
    CHECK(polytope_set_equal(u, poly({{Rational(0)}, {Rational(1)}})));
}

TEST_CASE("polytope inclusion with refutation witness") {
    const VPolytope seg = poly({{Rational(-1)}, {Rational(1)}});
    CHECK(polytope_contains(seg, poly({{Rational(0)}})).contained);

    auto r = polytope_contains(seg, poly({{Rational(2)}}));
    REQUIRE_FALSE(r.contained);
    CHECK(r.offending_vertex == Vec{Rational(2)});

    const VPolytope square = poly({v2(1, 1), v2(1, -1), v2(-1, 1), v2(-1, -1)});
    const VPolytope diamond = poly({v2(1, 0), v2(-1, 0), v2(0, 1), v2(0, -1)});
    auto rd = polytope_contains(diamond, square);
    REQUIRE_FALSE(rd.contained);
    // Support check along the separator: square reaches strictly further.
    CHECK(support_value(square, rd.separator) > support_value(diamond, rd.separator));
    CHECK(support_value(square, v2(1, 1)) == 2);
    CHECK(support_value(diamond, v2(1, 1)) == 1);
}

TEST_CASE("polar cone of the nonnegative orthant") {
    FGCone c{2, {v2(1, 0), v2(0, 1)}, {}};
    const HPolyhedron h = polar_cone(c);
    CHECK(h.contains(v2(-1, -1)));
    CHECK_FALSE(h.contains(v2(1, 0)));
    CHECK(h.contains(vzero(2)));
}

TEST_CASE("polar of a line cone uses an equality row") {
    FGCone c{2, {}, {v2(0, 1)}};
    const HPolyhedron h = polar_cone(c);
    CHECK(h.contains(v2(1, 0)));
    CHECK_FALSE(h.contains(v2(0, 1)));
    CHECK(h.contains(vzero(2)));
}

TEST_CASE("tangent and normal cones at a vertex of the orthant") {
    HPolyhedron s;
    s.dim = 2;
    s.ineqs = {{v2(-1, 0), Rational(0)}, {v2(0, -1), Rational(0)}};
    auto tn = tangent_normal_cones(s, vzero(2));
    CHECK(tn.tangent.contains(v2(1, 2)));
    CHECK_FALSE(tn.tangent.contains(v2(-1, 0)));
    CHECK(cone_member(tn.normal, v2(-1, -2)));
    CHECK_FALSE(cone_member(tn.normal, v2(1, 0)));

    auto interior = tangent_normal_cones(s, v2(1, 1));
    CHECK(interior.tangent.ineqs.empty());
    CHECK(interior.tangent.contains(v2(-5, 7)));
    CHECK(cone_member(interior.normal, vzero(2)));
    CHECK_FALSE(cone_member(interior.normal, v2(0, 1)));
}

TEST_CASE("equality rows add lineality to the normal cone") {
    HPolyhedron s;
    s.dim = 2;
    s.eqs = {{v2(0, 1), Rational(0)}};
    auto tn = tangent_normal_cones(s, vzero(2));
    CHECK(tn.tangent.contains(v2(3, 0)));
    CHECK_FALSE(tn.tangent.contains(v2(0, 1)));
    CHECK(cone_member(tn.normal, v2(0, 1)));
    CHECK(cone_member(tn.normal, v2(0, -1)));
    CHECK_FALSE(cone_member(tn.normal, v2(1, 0)));
}

TEST_CASE("infeasible base point is rejected with the violated row named") {
    HPolyhedron s;
    s.dim = 1;
    s.ineqs = {{{Rational(1)}, Rational(0)}};
    CHECK_THROWS_AS(tangent_normal_cones(s, {Rational(1)}), PreconditionError);
    CHECK_THROWS_WITH(tangent_normal_cones(s, {Rational(1)}),
                      Catch::Matchers::ContainsSubstring("inequality row 0"));
}

TEST_CASE("distance-probe tangency on a segment") {
    const VPolytope seg = poly({v2(0, 0), v2(1, 0)});
    auto along = tangent_via_distance_oracle(seg, v2(0, 0), v2(1, 0));
    CHECK(along.verdict == TangentVerdict::Tangent);

    auto away = tangent_via_distance_oracle(seg, v2(0, 0), v2(0, 1));
    CHECK(away.verdict == TangentVerdict::NotTangent);
    for (double r : away.ratios) CHECK(r == 1.0);  // distance to segment is exactly t

    auto zero = tangent_via_distance_oracle(seg, v2(0, 0), v2(0, 0));
    CHECK(zero.verdict == TangentVerdict::Tangent);

    CHECK_THROWS_AS(tangent_via_distance_oracle(seg, v2(5, 5), v2(1, 0)), PreconditionError);
}

TEST_CASE("distance probe is inconclusive above dimension 3") {
    std::vector<Vec> vs = {vzero(4)};
    Vec e = vzero(4);
    e[0] = 1;
    vs.push_back(e);
    auto r = tangent_via_distance_oracle(VPolytope(vs), vzero(4), e);
    CHECK(r.verdict == TangentVerdict::Inconclusive);
}

TEST_CASE("biduality: members satisfy sampled polar points, refutations land in the polar") {
    Rng rng(424242);
    for (int iter = 0; iter < 100; ++iter) {
        FGCone c;
        c.dim = static_cast<std::size_t>(rng.range(1, 4));
        const int nrays = rng.range(1, 4);
        for (int i = 0; i < nrays; ++i) c.rays.push_back(rng.vec(c.dim, 3, 2));
        if (rng.below(3) == 0) c.lines.push_back(rng.vec(c.dim, 3, 2));
        const HPolyhedron polar = polar_cone(c);

        // Sampled polar members: random points filtered by the polar rows.
        std::vector<Vec> polar_samples;
        for (int s = 0; s < 40 && polar_samples.size() < 5; ++s) {
            Vec y = rng.vec(c.dim, 2, 2);
            if (polar.contains(y)) polar_samples.push_back(y);
        }
        for (int s = 0; s < 5; ++s) {
            const Vec member = random_cone_point(rng, c);
            for (const auto& y : polar_samples) CHECK(dot(member, y) <= 0);
            CHECK(cone_member(c, member));
        }
        for (int s = 0; s < 5; ++s) {
            const Vec probe = rng.vec(c.dim, 4, 2);
            std::vector<Vec> gens = c.rays;
            for (const auto& l : c.lines) {
                gens.push_back(l);
                gens.push_back(vneg(l));
            }
            auto hm = hull_membership(probe, gens, HullMode::Conic);
            if (!hm.member) {
                // The Farkas separator must itself lie in the polar cone.
                CHECK(polar.contains(hm.separator));
                CHECK(dot(hm.separator, probe) == 1);
            }
        }
    }
}

TEST_CASE("inclusion is equivalent to support dominance on sampled directions") {
    Rng rng(313131);
    for (int iter = 0; iter < 60; ++iter) {
        const std::size_t dim = static_cast<std::size_t>(rng.range(1, 3));
        std::vector<Vec> av, bv;
        const int na = rng.range(1, 5);
        for (int i = 0; i < na; ++i) av.push_back(rng.vec(dim, 4, 2));
        const VPolytope a(av);
        if (rng.coin()) {
            // Build b inside a: convex combinations of a's vertices.
            const int nb = rng.range(1, 4);
            for (int i = 0; i < nb; ++i) {
                Vec p = vzero(dim);
                Rational total = 0;
                Vec weights(av.size());
                for (auto& w : weights) {
                    w = Rational(rng.range(0, 4));
                    total += w;
                }
                if (total == 0) weights[0] = total = 1;
                for (std::size_t k = 0; k < av.size(); ++k)
                    p = vadd(p, vscale(weights[k] / total, av[k]));
                bv.push_back(p);
            }
        } else {
            const int nb = rng.range(1, 4);
            for (int i = 0; i < nb; ++i) bv.push_back(rng.vec(dim, 5, 2));
        }
        const VPolytope b(bv);
        auto res = polytope_contains(a, b);
        if (res.contained) {
            for (int s = 0; s < 500; ++s) {
                const Vec d = rng.vec(dim, 5, 3);
                CHECK(support_value(b, d) <= support_value(a, d));
            }
        } else {
            // The refutation hyperplane is an exact support violation.
            CHECK(support_value(b, res.separator) > support_value(a, res.separator));
        }
    }
}

TEST_CASE("minkowski support additivity is exact") {
    Rng rng(555001);
    for (int iter = 0; iter < 40; ++iter) {
        const std::size_t dim = static_cast<std::size_t>(rng.range(1, 3));
        std::vector<Vec> av, bv;
        for (int i = 0, n = rng.range(1, 4); i < n; ++i) av.push_back(rng.vec(dim));
        for (int i = 0, n = rng.range(1, 4); i < n; ++i) bv.push_back(rng.vec(dim));
        const VPolytope a(av), b(bv), s = minkowski_sum(a, b);
        for (int k = 0; k < 25; ++k) {
            const Vec d = rng.vec(dim, 6, 3);
            CHECK(support_value(s, d) == support_value(a, d) + support_value(b, d));
        }
    }
}

TEST_CASE("tangent and normal cones are polar to each other") {
    Rng rng(88990);
    for (int iter = 0; iter < 50; ++iter) {
        const std::size_t dim = static_cast<std::size_t>(rng.range(1, 3));
        const Vec x = rng.vec(dim, 3, 2);
        HPolyhedron s;
        s.dim = dim;
        for (int i = 0, n = rng.range(1, 4); i < n; ++i) {
            Vec normal = rng.vec(dim, 3, 2);
            if (is_zero(normal)) normal[0] = 1;
            const Rational at = dot(normal, x);
            switch (rng.below(3)) {
                case 0: s.ineqs.push_back({normal, at});  // active
                    break;
                case 1: s.ineqs.push_back({normal, at + Rational(rng.range(1, 3))});  // slack
                    break;
                default: s.eqs.push_back({normal, at});
            }
        }
        auto tn = tangent_normal_cones(s, x);

        // Every normal-cone generator has nonpositive value over the
        // tangent cone: max <n, d> over T intersected with a unit box is 0.
        std::vector<Vec> gens = tn.normal.rays;
        for (const auto& l : tn.normal.lines) {
            gens.push_back(l);
            gens.push_back(vneg(l));
        }
        for (const auto& n : gens) {
            LinearProgram lp;
            lp.num_vars = static_cast<int>(dim);
            for (const auto& r : tn.tangent.ineqs) lp.rows.push_back({r.normal, 0, RowSense::LE});
            for (const auto& e : tn.tangent.eqs) lp.rows.push_back({e.normal, 0, RowSense::EQ});
            for (std::size_t j = 0; j < dim; ++j) {
                Vec e = vzero(dim);
                e[j] = 1;
                lp.rows.push_back({e, 1, RowSense::LE});
                lp.rows.push_back({vneg(e), 1, RowSense::LE});
            }
            lp.objective = n;
            lp.sense = ObjSense::Maximize;
            auto res = solve_lp(lp);
            REQUIRE(res.status == LPStatus::Optimal);
            CHECK(res.value == 0);
        }

        // And membership in T matches membership in the polar of N on
        // random probes (biduality of the pair).
        const HPolyhedron polar_of_normal = polar_cone(tn.normal);
        for (int sdx = 0; sdx < 20; ++sdx) {
            const Vec d = rng.vec(dim, 4, 2);
            CHECK(tn.tangent.contains(d) == polar_of_normal.contains(d));
        }
    }
}
