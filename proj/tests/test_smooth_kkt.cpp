// Multiplier certificates and constraint qualifications for smooth problems:
// frozen single instances (including the two-piece junction example where the
// multiplier rule fails), refutation-quality properties, the KKT-to-FJ
// rescaling law, the implication audit, and the normal-cone cross-check on
// affine programs.

#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "optcert/smooth_kkt.hpp"
#include "example_functions.hpp"
#include "test_support.hpp"

using namespace optcert;

namespace {

Expr affine_expr(const Vec& g, const Rational& c) {
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < g.size(); ++i)
        terms.push_back(scalar_mult(g[i], variable(i)));
    terms.push_back(constant(c));
    return sum(terms);
}

SmoothProblemAtPoint raw_instance(Vec grad_f, std::vector<Vec> grad_g, std::vector<Vec> grad_h) {
    SmoothProblemAtPoint p;
    p.dim = grad_f.size();
    p.xstar = vzero(p.dim);
    p.grad_f = std::move(grad_f);
    p.num_ineqs = grad_g.size();
    for (std::size_t i = 0; i < grad_g.size(); ++i) p.active.push_back(i);
    p.grad_g_active = std::move(grad_g);
    p.grad_h = std::move(grad_h);
    return p;
}

} // namespace

TEST_CASE("junction example: every multiplier vanishes, so the rule fails") {
    Program prob;
    prob.dim = 2;
    prob.objective = exfn::ex1_f0();
    prob.eqs = {exfn::ex1_f1()};
    const Vec origin = vzero(2);

    auto p = smooth_problem_at_point(prob, origin);
    REQUIRE(p.grad_f == Vec{Rational(1), Rational(0)});
    REQUIRE(p.grad_h.size() == 1);
    REQUIRE(p.grad_h[0] == Vec{Rational(0), Rational(1)});
    REQUIRE(p.source == GradientSource::FromExpr);

    auto cert = kkt_fj_smooth(p, MultiplierMode::FritzJohn);
    REQUIRE(cert.status == CertStatus::Fails);
    REQUIRE(cert.refutation.has_value());
    const Vec& y = *cert.refutation;
    REQUIRE(dot(y, p.grad_f) <= -1);
    REQUIRE(dot(y, p.grad_h[0]) == 0);
    REQUIRE(y == Vec{Rational(-1), Rational(0)});

    // The same data supplied directly, bypassing the expression layer.
    auto manual = raw_instance({Rational(1), Rational(0)}, {}, {{Rational(0), Rational(1)}});
    manual.source = GradientSource::UserSupplied;
    REQUIRE(kkt_fj_smooth(manual, MultiplierMode::FritzJohn).status == CertStatus::Fails);
}

TEST_CASE("frozen multiplier certificates") {
    const Expr x = variable(0);
    const Expr y = variable(1);

    SECTION("zero objective gradient with one equality") {
        Program prob;
        prob.dim = 2;
        prob.objective = product(x, x);
        prob.eqs = {y};
        auto p = smooth_problem_at_point(prob, vzero(2));
        auto cert = kkt_fj_smooth(p, MultiplierMode::FritzJohn);
        REQUIRE(cert.status == CertStatus::Holds);
        REQUIRE(cert.lambda == Vec{Rational(1)});
        REQUIRE(cert.mu == Vec{Rational(0)});
    }
    SECTION("kkt mode on min x subject to -x <= 0") {
        Program prob;
        prob.dim = 1;
        prob.objective = x;
        prob.ineqs = {scalar_mult(-1, x)};
        auto p = smooth_problem_at_point(prob, {Rational(0)});

        auto kkt = kkt_fj_smooth(p, MultiplierMode::Kkt);
        REQUIRE(kkt.status == CertStatus::Holds);
        REQUIRE(kkt.lambda == Vec{Rational(1), Rational(1)});

        auto fj = kkt_fj_smooth(p, MultiplierMode::FritzJohn);
        REQUIRE(fj.status == CertStatus::Holds);
        REQUIRE(fj.lambda == Vec{Rational(1, 2), Rational(1, 2)});
        // The rescaling law: dividing the KKT multipliers by their total
        // reproduces a valid Fritz-John certificate.
        REQUIRE(fj.lambda[0] == kkt.lambda[0] / (kkt.lambda[0] + kkt.lambda[1]));
    }
    SECTION("kkt refutation is a descent direction in the linearizing cone") {
        auto p = raw_instance({Rational(1), Rational(0)}, {{Rational(0), Rational(-1)}}, {});
        auto cert = kkt_fj_smooth(p, MultiplierMode::Kkt);
        REQUIRE(cert.status == CertStatus::Fails);
        const Vec& yv = *cert.refutation;
        REQUIRE(dot(yv, p.grad_f) < 0);
        REQUIRE(dot(yv, p.grad_g_active[0]) <= 0);
    }
}

TEST_CASE("linearizing cone assembly") {
    SECTION("two sign constraints cut the nonnegative quadrant") {
        auto p = raw_instance(vzero(2), {{Rational(-1), Rational(0)}, {Rational(0), Rational(-1)}},
                              {});
        auto c = linearizing_cone(p);
        REQUIRE(c.ineqs.size() == 2);
        REQUIRE(c.contains({Rational(1), Rational(1)}));
        REQUIRE(c.contains({Rational(0), Rational(5)}));
        REQUIRE_FALSE(c.contains({Rational(-1), Rational(0)}));
    }
    SECTION("no active rows leave the whole space") {
        auto p = raw_instance(vzero(2), {}, {});
        auto c = linearizing_cone(p);
        REQUIRE(c.contains({Rational(-7), Rational(3)}));
    }
    SECTION("an equality pins a hyperplane") {
        auto p = raw_instance(vzero(2), {}, {{Rational(0), Rational(1)}});
        auto c = linearizing_cone(p);
        REQUIRE(c.contains({Rational(3), Rational(0)}));
        REQUIRE_FALSE(c.contains({Rational(0), Rational(1)}));
    }
}

TEST_CASE("constraint qualification checks") {
    SECTION("licq") {
        auto id2 = raw_instance(vzero(2), {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}},
                                {});
        REQUIRE(cq_licq(id2).holds);
        auto dep = raw_instance(vzero(2), {{Rational(1), Rational(2)}, {Rational(2), Rational(4)}},
                                {});
        auto r = cq_licq(dep);
        REQUIRE_FALSE(r.holds);
        REQUIRE(r.evidence.find("rank 1 of 2") != std::string::npos);
    }
    SECTION("mfcq finds the boxed strict direction") {
        auto p = raw_instance(vzero(2), {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}},
                              {});
        auto r = cq_mfcq(p);
        REQUIRE(r.holds);
        REQUIRE(r.slack == 1);
        REQUIRE(*r.witness == Vec{Rational(-1), Rational(-1)});
    }
    SECTION("mfcq rejects dependent equality gradients") {
        auto p = raw_instance(vzero(2), {}, {{Rational(0), Rational(1)}, {Rational(0), Rational(2)}});
        auto r = cq_mfcq(p);
        REQUIRE_FALSE(r.holds);
        REQUIRE(r.evidence == "equality gradients are linearly dependent");
    }
    SECTION("mfcq fails on opposing inequality normals") {
        auto p = raw_instance(vzero(1), {{Rational(1)}, {Rational(-1)}}, {});
        auto r = cq_mfcq(p);
        REQUIRE_FALSE(r.holds);
        REQUIRE(r.slack == 0);
    }
    SECTION("dependent inequality gradients may still satisfy mfcq") {
        auto p = raw_instance(vzero(2), {{Rational(1), Rational(0)}, {Rational(2), Rational(0)}},
                              {});
        REQUIRE_FALSE(cq_licq(p).holds);
        REQUIRE(cq_mfcq(p).holds);
    }
    SECTION("slater") {
        const Expr x = variable(0);
        Program prob;
        prob.dim = 1;
        prob.objective = x;
        prob.ineqs = {sum({abs_of(x), constant(-1)})};
        auto ok = cq_slater(prob, {Rational(0)});
        REQUIRE(ok.holds);
        auto boundary = cq_slater(prob, {Rational(1)});
        REQUIRE_FALSE(boundary.holds);
        REQUIRE(boundary.evidence.find("not strictly negative") != std::string::npos);

        Program nonconvex;
        nonconvex.dim = 1;
        nonconvex.objective = x;
        nonconvex.ineqs = {scalar_mult(-1, abs_of(x))};
        REQUIRE_THROWS_AS(cq_slater(nonconvex, {Rational(0)}), InputError);

        CqRequest req;
        req.which = CqKind::Slater;
        req.program = prob;
        REQUIRE_THROWS_WITH(cq_check(req), Catch::Matchers::ContainsSubstring("witness point"));
    }
    SECTION("abadie on polyhedral constraints") {
        const Expr x = variable(0);
        const Expr y = variable(1);
        Program prob;
        prob.dim = 2;
        prob.objective = x;
        prob.ineqs = {sum({x, constant(-1)}), scalar_mult(-1, y)};
        prob.eqs = {};
        auto r = cq_abadie_polyhedral(prob, {Rational(1), Rational(0)});
        REQUIRE(r.holds);
        REQUIRE(r.evidence.find("2 active rows") != std::string::npos);

        Program curved;
        curved.dim = 1;
        curved.objective = x;
        curved.ineqs = {abs_of(x)};
        REQUIRE_THROWS_WITH(cq_abadie_polyhedral(curved, {Rational(0)}),
                            Catch::Matchers::ContainsSubstring("sampling falsifier"));
    }
}

TEST_CASE("failed searches always hand back a verifiable descent direction") {
    testsup::Rng rng(0x736d6f6f746866ULL);
    int fails = 0;
    for (int iter = 0; iter < 50; ++iter) {
        const std::size_t n = 2 + rng.below(2);
        const std::size_t gs = rng.below(3);
        const std::size_t hs = rng.below(2);
        std::vector<Vec> grad_g, grad_h;
        for (std::size_t i = 0; i < gs; ++i) grad_g.push_back(rng.vec(n, 3, 2));
        for (std::size_t j = 0; j < hs; ++j) grad_h.push_back(rng.vec(n, 3, 2));
        Vec grad_f = rng.vec(n, 3, 2);
        if (is_zero(grad_f)) continue;
        auto p = raw_instance(grad_f, grad_g, grad_h);
        auto cert = kkt_fj_smooth(p, MultiplierMode::FritzJohn);
        if (cert.status != CertStatus::Fails) continue;
        ++fails;
        const Vec& y = *cert.refutation;
        REQUIRE(dot(y, p.grad_f) < 0);
        for (const auto& g : p.grad_g_active) REQUIRE(dot(y, g) <= 0);
        for (const auto& h : p.grad_h) REQUIRE(dot(y, h) == 0);
    }
    REQUIRE(fails >= 10);
}

TEST_CASE("kkt certificates rescale into fritz-john certificates") {
    testsup::Rng rng(0x7265736361ULL);
    for (int iter = 0; iter < 30; ++iter) {
        const std::size_t n = 2 + rng.below(2);
        const std::size_t gs = 1 + rng.below(2);
        const std::size_t hs = rng.below(2);
        std::vector<Vec> grad_g, grad_h;
        Vec combo = vzero(n);
        for (std::size_t i = 0; i < gs; ++i) {
            grad_g.push_back(rng.vec(n, 3, 2));
            const Rational li(rng.below(4), 1 + rng.below(3));
            combo = vadd(combo, vscale(li, grad_g.back()));
        }
        for (std::size_t j = 0; j < hs; ++j) {
            grad_h.push_back(rng.vec(n, 3, 2));
            combo = vadd(combo, vscale(rng.rational(3, 2), grad_h.back()));
        }
        auto p = raw_instance(vneg(combo), grad_g, grad_h);

        auto kkt = kkt_fj_smooth(p, MultiplierMode::Kkt);
        REQUIRE(kkt.status == CertStatus::Holds);
        auto fj = kkt_fj_smooth(p, MultiplierMode::FritzJohn);
        REQUIRE(fj.status == CertStatus::Holds);

        // Rescale the KKT multipliers by 1/(1 + total) and re-verify the
        // Fritz-John algebra directly.
        Rational total = 1;
        for (std::size_t i = 1; i < kkt.lambda.size(); ++i) total += kkt.lambda[i];
        Vec recombined = vscale(kkt.lambda[0] / total, p.grad_f);
        Rational sum_check = kkt.lambda[0] / total;
        for (std::size_t k = 0; k < p.active.size(); ++k) {
            const Rational s = kkt.lambda[p.active[k] + 1] / total;
            sum_check += s;
            recombined = vadd(recombined, vscale(s, p.grad_g_active[k]));
        }
        for (std::size_t j = 0; j < p.grad_h.size(); ++j)
            recombined = vadd(recombined, vscale(kkt.mu[j] / total, p.grad_h[j]));
        REQUIRE(sum_check == 1);
        REQUIRE(is_zero(recombined));
    }
}

TEST_CASE("implication audit over an engineered corpus") {
    testsup::Rng rng(0x61756469ULL);

    SECTION("licq instances imply mfcq throughout") {
        std::vector<SmoothCqInstance> corpus;
        for (int iter = 0; iter < 40; ++iter) {
            const std::size_t n = 2 + rng.below(3);
            const std::size_t rows = 1 + rng.below(n);
            std::vector<Vec> grads;
            for (std::size_t i = 0; i < rows; ++i) {
                Vec g = vzero(n);
                g[i] = Rational(1 + rng.below(3));
                for (std::size_t j = i + 1; j < n; ++j) g[j] = rng.rational(2, 2);
                grads.push_back(std::move(g));
            }
            corpus.push_back({raw_instance(rng.vec(n, 2, 2), grads, {}), std::nullopt,
                              std::nullopt});
        }
        auto rep = cq_implication_audit(corpus);
        REQUIRE(rep.instances == 40);
        REQUIRE(rep.licq_holds == 40);
        REQUIRE(rep.mfcq_holds == 40);
        REQUIRE(rep.violations.empty());
        REQUIRE(rep.note.find("guignard") != std::string::npos);
    }
    SECTION("slater instances imply mfcq") {
        std::vector<SmoothCqInstance> corpus;
        int made = 0;
        while (made < 25) {
            const std::size_t n = 1 + rng.below(3);
            const Vec xstar = rng.vec(n, 2, 2);
            const Vec x0 = vadd(xstar, rng.vec(n, 2, 2));
            if (x0 == xstar) continue;
            const Vec dir = vsub(x0, xstar);
            const std::size_t gs = 1 + rng.below(2);
            Program prob;
            prob.dim = n;
            prob.objective = affine_expr(rng.vec(n, 2, 2), 0);
            bool ok = true;
            for (std::size_t i = 0; i < gs && ok; ++i) {
                Vec a = rng.vec(n, 2, 2);
                if (dot(a, dir) == 0) { ok = false; break; }
                if (dot(a, dir) > 0) a = vneg(a);
                prob.ineqs.push_back(affine_expr(a, -dot(a, xstar)));
            }
            if (!ok) continue;
            corpus.push_back(
                {smooth_problem_at_point(prob, xstar), prob, x0});
            ++made;
        }
        auto rep = cq_implication_audit(corpus);
        REQUIRE(rep.instances == 25);
        REQUIRE(rep.slater_checked == 25);
        REQUIRE(rep.slater_holds == 25);
        REQUIRE(rep.violations.empty());
    }
    SECTION("dependent affine equalities are skipped, not reported") {
        const Expr x = variable(0);
        const Expr y = variable(1);
        Program prob;
        prob.dim = 2;
        prob.objective = x;
        prob.ineqs = {x};
        prob.eqs = {y, scalar_mult(2, y)};
        SmoothCqInstance inst{smooth_problem_at_point(prob, {Rational(0), Rational(0)}), prob,
                              Vec{Rational(-1), Rational(0)}};
        auto rep = cq_implication_audit({inst});
        REQUIRE(rep.slater_holds == 1);
        REQUIRE(rep.slater_skipped_dependent_eqs == 1);
        REQUIRE(rep.violations.empty());
    }
    SECTION("empty corpus") {
        auto rep = cq_implication_audit({});
        REQUIRE(rep.instances == 0);
        REQUIRE(rep.violations.empty());
    }
}

TEST_CASE("kkt agrees with normal-cone membership on affine programs") {
    testsup::Rng rng(0x6e6f726d616cULL);
    int holds_seen = 0, fails_seen = 0;
    for (int iter = 0; iter < 50; ++iter) {
        const std::size_t n = 2 + rng.below(2);
        const Vec xstar = rng.vec(n, 2, 2);
        Program prob;
        prob.dim = n;

        HPolyhedron s;
        s.dim = n;
        std::vector<Vec> active_normals, eq_normals;
        const std::size_t actives = 1 + rng.below(2);
        for (std::size_t i = 0; i < actives; ++i) {
            const Vec a = rng.vec(n, 2, 2);
            prob.ineqs.push_back(affine_expr(a, -dot(a, xstar)));
            s.ineqs.push_back({a, dot(a, xstar)});
            active_normals.push_back(a);
        }
        if (rng.coin()) {  // one inactive inequality
            const Vec a = rng.vec(n, 2, 2);
            prob.ineqs.push_back(affine_expr(a, -dot(a, xstar) - 1));
            s.ineqs.push_back({a, dot(a, xstar) + 1});
        }
        const std::size_t hs = rng.below(2);
        for (std::size_t j = 0; j < hs; ++j) {
            const Vec b = rng.vec(n, 2, 2);
            prob.eqs.push_back(affine_expr(b, -dot(b, xstar)));
            s.eqs.push_back({b, dot(b, xstar)});
            eq_normals.push_back(b);
        }

        // Even iterations build the objective as a certified normal-cone
        // member; odd iterations draw it at random (usually outside).
        Vec c;
        if (iter % 2 == 0) {
            Vec combo = vzero(n);
            for (const auto& a : active_normals)
                combo = vadd(combo, vscale(Rational(rng.below(3), 1 + rng.below(2)), a));
            for (const auto& b : eq_normals) combo = vadd(combo, vscale(rng.rational(2, 2), b));
            c = vneg(combo);
        } else {
            c = rng.vec(n, 2, 2);
        }
        prob.objective = affine_expr(c, 0);

        auto p = smooth_problem_at_point(prob, xstar);
        const bool kkt = kkt_fj_smooth(p, MultiplierMode::Kkt).status == CertStatus::Holds;
        auto tn = tangent_normal_cones(s, xstar);
        const bool member = cone_member(tn.normal, vneg(p.grad_f));
        REQUIRE(kkt == member);
        (kkt ? holds_seen : fails_seen)++;
    }
    REQUIRE(holds_seen >= 5);
    REQUIRE(fails_seen >= 5);
}
