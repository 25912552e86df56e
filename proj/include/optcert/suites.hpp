#pragma once

// Seeded property suites. Each suite generates a deterministic batch of
// random instances from a caller-supplied seed, checks a library claim
// against an independent oracle route (LP vs. generator enumeration, exact
// evaluation vs. numeric differencing, brute force vs. certificate), and
// reports the verified-assertion count plus the first few failures. The
// regression corpus pins one seed per suite; the acceptance gate re-runs the
// same suites with the same seeds.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "optcert/clarke.hpp"
#include "optcert/convex.hpp"
#include "optcert/ekeland.hpp"
#include "optcert/expr.hpp"
#include "optcert/geometry.hpp"
#include "optcert/lp.hpp"
#include "optcert/quasidiff.hpp"
#include "optcert/rational.hpp"
#include "optcert/setvalued.hpp"
#include "optcert/smooth_kkt.hpp"

namespace optcert {

struct SuiteResult {
    std::string suite;
    std::uint64_t seed = 0;
    bool passed = false;
    std::size_t instances = 0;  // generated instances
    std::size_t checked = 0;    // individual verified assertions
    std::vector<std::string> failures;
};

namespace suitedetail {

// Deterministic helper RNG: mt19937_64 output reduced by modulo, so a seed
// pins the whole instance stream.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }
    long range(long lo, long hi) {
        return lo + static_cast<long>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    bool coin() { return (eng_() & 1) != 0; }
    Rational rational(long max_num, long max_den) {
        return Rational(range(-max_num, max_num), range(1, max_den));
    }
    Rational positive(long max_num, long max_den) {
        return Rational(range(1, max_num), range(1, max_den));
    }
    Vec vec(std::size_t n, long max_num, long max_den) {
        Vec v(n);
        for (auto& c : v) c = rational(max_num, max_den);
        return v;
    }
    Vec nonzero_vec(std::size_t n, long max_num, long max_den) {
        for (;;) {
            Vec v = vec(n, max_num, max_den);
            if (!is_zero(v)) return v;
        }
    }

  private:
    std::mt19937_64 eng_;
};

struct Tally {
    SuiteResult* out;
    void require(bool ok, const std::string& what) {
        ++out->checked;
        if (!ok && out->failures.size() < 8) out->failures.push_back(what);
        if (!ok) ++fail_count;
    }
    std::size_t fail_count = 0;
};

inline Expr affine_expr(const Vec& a, const Rational& b) {
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < a.size(); ++i)
        terms.push_back(scalar_mult(a[i], variable(i)));
    terms.push_back(constant(b));
    return sum(std::move(terms));
}

inline FGCone orthant(std::size_t dim) {
    FGCone c;
    c.dim = dim;
    for (std::size_t i = 0; i < dim; ++i) {
        Vec e = vzero(dim);
        e[i] = 1;
        c.rays.push_back(std::move(e));
    }
    return c;
}

// Generators of the cone (rays plus both signs of each line), for conic
// hull-membership queries.
inline std::vector<Vec> cone_generators(const FGCone& c) {
    std::vector<Vec> gens = c.rays;
    for (const auto& l : c.lines) {
        gens.push_back(l);
        gens.push_back(vneg(l));
    }
    return gens;
}

} // namespace suitedetail

// --- 1. Ekeland spaces ---------------------------------------------------------

// 200 random finite metric spaces (graph metrics from shortest-path closure),
// each run twice: lambda = 1 and a random lambda > 0. Conclusions (i)-(iii)
// are recomputed here from the raw distance matrix and values -- the engine's
// own flags are cross-checked, not trusted.
inline SuiteResult suite_ekeland_spaces(std::uint64_t seed) {
    SuiteResult out;
    out.suite = "ekeland-spaces";
    out.seed = seed;
    suitedetail::Rng rng(seed);
    suitedetail::Tally t{&out};
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.range(2, 12));
        Mat d(n, Vec(n, Rational(0)));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                d[i][j] = Rational(rng.range(1, 32), rng.range(1, 4));
                d[j][i] = d[i][j];
            }
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
        const FiniteMetricSpace m = metric_space_from_matrix(d);

        Vec f = rng.vec(n, 10, 3);
        const std::size_t z = rng.below(n);
        const Rational fmin = *std::min_element(f.begin(), f.end());
        const Rational eps = f[z] - fmin + Rational(rng.range(1, 12), 4);
        const Rational lambdas[2] = {Rational(1), rng.positive(4, 2)};
        ++out.instances;

        for (const Rational& lambda : lambdas) {
            const EkelandResult res = ekeland_point(m, f, z, eps, lambda);
            const Rational kappa = eps / lambda;
            const std::string tag = "space " + std::to_string(trial) + ", lambda " +
                                    format_rational(lambda);
            t.require(m.dist[z][res.y] <= lambda, tag + ": (i) d(z,y) <= lambda");
            t.require(f[res.y] + kappa * m.dist[z][res.y] <= f[z],
                      tag + ": (ii) f(y) + (eps/lambda) d(z,y) <= f(z)");
            bool iii = true;
            for (std::size_t x = 0; x < n; ++x)
                if (f[x] + kappa * m.dist[x][res.y] < f[res.y]) iii = false;
            t.require(iii, tag + ": (iii) f(x) + (eps/lambda) d(x,y) >= f(y) for all x");
            t.require(res.check_i && res.check_ii && res.check_iii,
                      tag + ": engine's own conclusion flags");
            for (std::size_t s = 0; s + 1 < res.iterates.size(); ++s)
                t.require(f[res.iterates[s + 1].z] < f[res.iterates[s].z],
                          tag + ": strict descent of iterates");
        }
    }
    out.passed = (t.fail_count == 0);
    return out;
}

// --- 2. Cone biduality / Farkas -------------------------------------------------

// 100 random finitely generated cones, dim <= 4. Route A decides membership
// by LP over the generators; route B passes through the polar twice (H-form
// of C*, generator enumeration, H-form of C**) and evaluates rows. Biduality
// says the answers agree; on rejection the LP separator is re-verified
// against every generator.
inline SuiteResult suite_cone_biduality(std::uint64_t seed) {
    SuiteResult out;
    out.suite = "cone-biduality";
    out.seed = seed;
    suitedetail::Rng rng(seed);
    suitedetail::Tally t{&out};
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dim = static_cast<std::size_t>(rng.range(1, 4));
        FGCone c;
        c.dim = dim;
        const std::size_t nrays = rng.below(5);
        const std::size_t nlines = rng.below(3);
        for (std::size_t i = 0; i < nrays; ++i) c.rays.push_back(rng.nonzero_vec(dim, 3, 2));
        for (std::size_t i = 0; i < nlines; ++i) c.lines.push_back(rng.nonzero_vec(dim, 3, 2));
        ++out.instances;

        const HPolyhedron polar = polar_cone(c);
        std::vector<Vec> polar_le, polar_eq;
        for (const auto& row : polar.ineqs) polar_le.push_back(row.normal);
        for (const auto& row : polar.eqs) polar_eq.push_back(row.normal);
        const FGCone cstar = enumerate_cone_generators(dim, polar_le, polar_eq);
        const HPolyhedron bidual = polar_cone(cstar);  // H-form of C**

        const std::vector<Vec> gens = suitedetail::cone_generators(c);
        for (int probe = 0; probe < 12; ++probe) {
            Vec v;
            if (probe % 3 == 0 && !gens.empty()) {
                v = vzero(dim);
                for (const auto& g : gens)
                    if (rng.coin()) v = vadd(v, vscale(rng.positive(3, 2), g));
            } else {
                v = rng.vec(dim, 4, 2);
            }
            const bool lp_route = cone_member(c, v);
            const bool polar_route = bidual.contains(v);
            t.require(lp_route == polar_route,
                      "cone " + std::to_string(trial) + ": biduality C = C** at " +
                          format_vec(v));
            if (!lp_route && !gens.empty()) {
                const HullResult h = hull_membership(v, gens, HullMode::Conic);
                t.require(!h.member, "cone " + std::to_string(trial) +
                                         ": hull route agrees with rejection");
                bool sep_ok = dot(h.separator, v) == h.separator_rhs + 1;
                for (const auto& g : gens)
                    if (dot(h.separator, g) > h.separator_rhs) sep_ok = false;
                t.require(sep_ok, "cone " + std::to_string(trial) +
                                      ": separator validity at " + format_vec(v));
            }
        }
    }
    out.passed = (t.fail_count == 0);
    return out;
}

// --- 3. Polytope support dominance ----------------------------------------------

// 100 random polytope pairs. Route A: polytope_contains (per-vertex LP).
// Route B: enumerate the valid inequalities of the container by running the
// double description on the polar of its homogenization, then test support
// dominance against every facet row. Exhaustive because the enumerated rows
// generate all valid inequalities.
inline SuiteResult suite_polytope_support(std::uint64_t seed) {
    SuiteResult out;
    out.suite = "polytope-support";
    out.seed = seed;
    suitedetail::Rng rng(seed);
    suitedetail::Tally t{&out};
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dim = static_cast<std::size_t>(rng.range(1, 3));
        auto random_polytope = [&](std::size_t verts) {
            std::vector<Vec> vs;
            for (std::size_t i = 0; i < verts; ++i) vs.push_back(rng.vec(dim, 4, 2));
            return VPolytope(std::move(vs));
        };
        const VPolytope outer = random_polytope(static_cast<std::size_t>(rng.range(1, 6)));
        VPolytope inner;
        if (rng.coin()) {
            // Convex combinations of the container's vertices: contained by
            // construction.
            std::vector<Vec> vs;
            const std::size_t count = static_cast<std::size_t>(rng.range(1, 4));
            for (std::size_t i = 0; i < count; ++i) {
                Vec p = vzero(dim);
                Rational total = 0;
                Vec weights(outer.vertices.size());
                for (auto& w : weights) {
                    w = rng.positive(4, 1);
                    total += w;
                }
                for (std::size_t k = 0; k < outer.vertices.size(); ++k)
                    p = vadd(p, vscale(weights[k] / total, outer.vertices[k]));
                vs.push_back(std::move(p));
            }
            inner = VPolytope(std::move(vs));
        } else {
            inner = random_polytope(static_cast<std::size_t>(rng.range(1, 6)));
        }
        ++out.instances;

        // Homogenize the container: rays (v, 1).
        FGCone hom;
        hom.dim = dim + 1;
        for (const auto& v : outer.vertices) {
            Vec r = v;
            r.push_back(Rational(1));
            hom.rays.push_back(std::move(r));
        }
        const HPolyhedron polar = polar_cone(hom);
        std::vector<Vec> le, eq;
        for (const auto& row : polar.ineqs) le.push_back(row.normal);
        for (const auto& row : polar.eqs) eq.push_back(row.normal);
        const FGCone facets = enumerate_cone_generators(dim + 1, le, eq);

        // Each generator (a, b) of the polar yields the valid inequality
        // <a, x> + b <= 0 on the container; lines valid with equality.
        std::vector<std::pair<Vec, Rational>> rows;  // (a, b): <a,x> <= -b
        for (const auto& r : facets.rays)
            rows.emplace_back(Vec(r.begin(), r.end() - 1), r.back());
        for (const auto& l : facets.lines) {
            rows.emplace_back(Vec(l.begin(), l.end() - 1), l.back());
            Vec neg = vneg(l);
            rows.emplace_back(Vec(neg.begin(), neg.end() - 1), neg.back());
        }
        bool dominance = true;
        for (const auto& [a, b] : rows) {
            if (is_zero(a)) continue;  // 0 <= -b is vacuous on valid rows
            if (support_value(inner, a) > -b) dominance = false;
        }
        const ContainsResult lp = polytope_contains(outer, inner);
        t.require(lp.contained == dominance,
                  "pair " + std::to_string(trial) +
                      ": membership LP vs. facet support dominance");
        if (!lp.contained) {
            bool sep_ok = dot(lp.separator, lp.offending_vertex) == lp.separator_rhs + 1;
            for (const auto& v : outer.vertices)
                if (dot(lp.separator, v) > lp.separator_rhs) sep_ok = false;
            t.require(sep_ok, "pair " + std::to_string(trial) + ": separator validity");
            bool found = false;
            for (const auto& v : inner.vertices)
                if (v == lp.offending_vertex) found = true;
            t.require(found, "pair " + std::to_string(trial) +
                                 ": offending vertex is a vertex of the inner polytope");
        }
    }
    out.passed = (t.fail_count == 0);
    return out;
}

// --- 4. Subdifferential consistency ---------------------------------------------

namespace suitedetail {

// Structurally convex expressions: affine atoms, abs of affine, sums, finite
// max, nonnegative scalar multiples.
inline Expr random_convex_expr(Rng& rng, std::size_t dim, int depth) {
    const long pick = depth <= 0 ? rng.range(0, 1) : rng.range(0, 4);
    switch (pick) {
        case 0: return affine_expr(rng.vec(dim, 3, 2), rng.rational(3, 2));
        case 1: return abs_of(affine_expr(rng.vec(dim, 3, 2), rng.rational(3, 2)));
        case 2: {
            std::vector<Expr> parts;
            const long n = rng.range(2, 3);
            for (long i = 0; i < n; ++i)
                parts.push_back(random_convex_expr(rng, dim, depth - 1));
            return sum(std::move(parts));
        }
        case 3: {
            std::vector<Expr> parts;
            const long n = rng.range(2, 3);
            for (long i = 0; i < n; ++i)
                parts.push_back(random_convex_expr(rng, dim, depth - 1));
            return max_of(std::move(parts));
        }
        default:
            return scalar_mult(rng.positive(3, 2), random_convex_expr(rng, dim, depth - 1));
    }
}

} // namespace suitedetail

// 200 random convex-fragment instances. The support function of the computed
// subdifferential must match one-sided numeric difference quotients within
// 1e-6 in every probed direction, and the subgradient inequality
// f(y) >= f(x) + <g, y - x> must hold exactly for 300 sampled y -- checked
// against all subgradients at once through the support function.
inline SuiteResult suite_subdiff_consistency(std::uint64_t seed) {
    SuiteResult out;
    out.suite = "subdiff-consistency";
    out.seed = seed;
    suitedetail::Rng rng(seed);
    suitedetail::Tally t{&out};
    const double tol = 1e-6;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t dim = static_cast<std::size_t>(rng.range(1, 3));
        const Expr e = suitedetail::random_convex_expr(rng, dim, 2);
        const Vec x = rng.vec(dim, 2, 2);
        const VPolytope sub = convex_subdifferential(e, x);
        ++out.instances;

        for (int k = 0; k < 4; ++k) {
            const Vec dvec = rng.nonzero_vec(dim, 2, 1);
            const Rational sup = support_value(sub, dvec);
            const DirDeriv dd = directional_derivative_numeric(e, x, dvec);
            t.require(std::abs(static_cast<double>(sup) - dd.estimate) <= tol,
                      "instance " + std::to_string(trial) +
                          ": support value vs. numeric directional derivative along " +
                          format_vec(dvec));
        }

        const Rational fx = eval(e, x).rat();
        bool subgrad_ok = true;
        for (int k = 0; k < 300; ++k) {
            const Vec y = rng.vec(dim, 3, 2);
            const Rational fy = eval(e, y).rat();
            // f(y) - f(x) >= max over subgradients of <g, y - x>
            if (fy - fx < support_value(sub, vsub(y, x))) subgrad_ok = false;
        }
        t.require(subgrad_ok, "instance " + std::to_string(trial) +
                                  ": exact subgradient inequality on 300 sampled points");
    }
    out.passed = (t.fail_count == 0);
    return out;
}

// --- 5. Fritz John necessity ----------------------------------------------------

// 50 random affine convex programs whose minimizers come from an independent
// LP solve, plus 30 random piecewise-max programs whose minimizers are known
// by construction and confirmed by brute force over a rational lattice. The
// convex Fritz John certificate and the quasidifferential inclusion must
// hold at every one of them.
inline SuiteResult suite_fj_necessity(std::uint64_t seed) {
    SuiteResult out;
    out.suite = "fj-necessity";
    out.seed = seed;
    suitedetail::Rng rng(seed);
    suitedetail::Tally t{&out};

    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t dim = static_cast<std::size_t>(rng.range(1, 3));
        const Vec anchor = rng.vec(dim, 3, 2);
        Program prog;
        prog.dim = dim;
        const Vec c = rng.nonzero_vec(dim, 3, 1);
        prog.objective = suitedetail::affine_expr(c, rng.rational(2, 1));

        std::vector<LPRow> rows;
        const long extra = rng.range(2, 4);
        for (long i = 0; i < extra; ++i) {
            const Vec a = rng.nonzero_vec(dim, 3, 2);
            const Rational slack = rng.coin() ? Rational(0) : rng.positive(2, 1);
            const Rational b = -dot(a, anchor) - slack;  // <a, anchor> + b <= 0
            prog.ineqs.push_back(suitedetail::affine_expr(a, b));
            rows.push_back({a, -b, RowSense::LE});
        }
        for (std::size_t i = 0; i < dim; ++i) {  // box keeps the LP bounded
            Vec lo = vzero(dim), hi = vzero(dim);
            lo[i] = -1;
            hi[i] = 1;
            prog.ineqs.push_back(
                suitedetail::affine_expr(lo, Rational(-5)));  // -x_i - 5 <= 0
            prog.ineqs.push_back(suitedetail::affine_expr(hi, Rational(-5)));
            rows.push_back({lo, Rational(5), RowSense::LE});
            rows.push_back({hi, Rational(5), RowSense::LE});
        }
        if (rng.coin()) {
            const Vec h = rng.nonzero_vec(dim, 2, 1);
            prog.eqs.push_back(suitedetail::affine_expr(h, -dot(h, anchor)));
            rows.push_back({h, dot(h, anchor), RowSense::EQ});
        }
        ++out.instances;

        const LPResult lp = solve_lp(static_cast<int>(dim), rows, c, ObjSense::Minimize,
                                     std::vector<bool>(dim, false));
        t.require(lp.status == LPStatus::Optimal,
                  "affine program " + std::to_string(trial) + ": oracle LP is solvable");
        if (lp.status != LPStatus::Optimal) continue;
        const Certificate cert = fritz_john_convex(prog, lp.solution);
        t.require(cert.status == CertStatus::Holds,
                  "affine program " + std::to_string(trial) +
                      ": Fritz John holds at the LP minimizer " + format_vec(lp.solution));
    }

    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t dim = 2;
        Vec xstar(dim);
        for (auto& c : xstar) c = Rational(rng.range(-4, 4), 2);

        // Objective: max of affines vanishing at x*, with 0 in the convex
        // hull of the slopes, so x* is a global minimizer.
        std::vector<Expr> branches;
        Vec slope_sum = vzero(dim);
        const long nb = rng.range(2, 4);
        for (long i = 0; i < nb; ++i) {
            const Vec a = rng.nonzero_vec(dim, 3, 1);
            slope_sum = vadd(slope_sum, a);
            branches.push_back(suitedetail::affine_expr(a, -dot(a, xstar)));
        }
        const Vec closing = vneg(slope_sum);
        branches.push_back(suitedetail::affine_expr(closing, -dot(closing, xstar)));
        Program prog;
        prog.dim = dim;
        prog.objective = max_of(std::move(branches));

        const long ncons = rng.range(0, 2);
        for (long j = 0; j < ncons; ++j) {
            std::vector<Expr> cb;
            const long nl = rng.range(1, 2);
            for (long l = 0; l < nl; ++l) {
                const Vec b = rng.nonzero_vec(dim, 2, 1);
                cb.push_back(suitedetail::affine_expr(b, -dot(b, xstar)));
            }
            Expr g = max_of(std::move(cb));
            if (rng.coin()) g = sum({g, constant(Rational(-1))});  // inactive variant
            prog.ineqs.push_back(std::move(g));
        }
        ++out.instances;

        // Brute-force oracle: x* beats every feasible point of the lattice
        // {-2, -3/2, ..., 2}^2.
        const Rational fstar = eval(prog.objective, xstar).rat();
        bool lattice_min = true;
        for (long i = -4; i <= 4; ++i)
            for (long j = -4; j <= 4; ++j) {
                const Vec p{Rational(i, 2), Rational(j, 2)};
                bool feasible = true;
                for (const auto& g : prog.ineqs)
                    if (eval(g, p).rat() > 0) feasible = false;
                if (feasible && eval(prog.objective, p).rat() < fstar) lattice_min = false;
            }
        t.require(lattice_min, "max-affine program " + std::to_string(trial) +
                                   ": x* is lattice-minimal by brute force");
        const QdInclusionResult inc = qd_constrained_check(prog, xstar);
        t.require(inc.holds, "max-affine program " + std::to_string(trial) +
                                 ": quasidifferential inclusion holds at x* " +
                                 format_vec(xstar));
    }
    out.passed = (t.fail_count == 0);
    return out;
}

// --- 6. Quasidifferential directional formula -----------------------------------

namespace suitedetail {

// Quasidifferentiable fragment with both signs: affine, abs of affine, sums,
// max, min, arbitrary scalar multiples.
inline Expr random_qd_expr(Rng& rng, std::size_t dim, int depth) {
    const long pick = depth <= 0 ? rng.range(0, 1) : rng.range(0, 5);
    switch (pick) {
        case 0: return affine_expr(rng.vec(dim, 3, 2), rng.rational(3, 2));
        case 1: return abs_of(affine_expr(rng.vec(dim, 3, 2), rng.rational(3, 2)));
        case 2:
        case 3: {
            std::vector<Expr> parts;
            const long n = rng.range(2, 3);
            for (long i = 0; i < n; ++i) parts.push_back(random_qd_expr(rng, dim, depth - 1));
            return pick == 2 ? max_of(std::move(parts)) : min_of(std::move(parts));
        }
        case 4: {
            std::vector<Expr> parts;
            const long n = rng.range(2, 3);
            for (long i = 0; i < n; ++i) parts.push_back(random_qd_expr(rng, dim, depth - 1));
            return sum(std::move(parts));
        }
        default: {
            Rational c = rng.rational(3, 2);
            if (c == 0) c = 1;
            return scalar_mult(c, random_qd_expr(rng, dim, depth - 1));
        }
    }
}

} // namespace suitedetail

// 200 random quasidifferentiable instances: the max-plus-min directional
// formula must match numeric difference quotients within 1e-6, and negative
// scaling must swap the pair exactly (set equality of polytopes).
inline SuiteResult suite_qd_directional(std::uint64_t seed) {
    SuiteResult out;
    out.suite = "qd-directional";
    out.seed = seed;
    suitedetail::Rng rng(seed);
    suitedetail::Tally t{&out};
    const double tol = 1e-6;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t dim = static_cast<std::size_t>(rng.range(1, 3));
        const Expr e = suitedetail::random_qd_expr(rng, dim, 2);
        const Vec x = rng.vec(dim, 2, 2);
        const QuasiDifferential q = qd_of_expr(e, x);
        ++out.instances;

        for (int k = 0; k < 4; ++k) {
            const Vec dvec = rng.nonzero_vec(dim, 2, 1);
            const Rational formula = qd_directional(q, dvec);
            const DirDeriv dd = directional_derivative_numeric(e, x, dvec);
            t.require(std::abs(static_cast<double>(formula) - dd.estimate) <= tol,
                      "instance " + std::to_string(trial) +
                          ": directional formula vs. numeric quotient along " +
                          format_vec(dvec));
        }

        for (const Rational& c : {Rational(-1), Rational(-2)}) {
            const QuasiDifferential s = qd_scale(c, q);
            const bool swap_ok = polytope_set_equal(s.sub, scale(c, q.super)) &&
                                 polytope_set_equal(s.super, scale(c, q.sub));
            t.require(swap_ok, "instance " + std::to_string(trial) +
                                   ": negative scaling swaps sub- and superdifferential (c = " +
                                   format_rational(c) + ")");
        }
    }
    out.passed = (t.fail_count == 0);
    return out;
}

// --- 7. Clarke bounds -----------------------------------------------------------

namespace suitedetail {

// Locally Lipschitz fragment accepted by the Clarke calculus: smooth
// polynomial atoms, abs / max / min over smooth branches, sums, scalar
// multiples.
inline Expr random_clarke_expr(Rng& rng, std::size_t dim, int depth) {
    auto smooth_atom = [&]() -> Expr {
        if (rng.coin()) return affine_expr(rng.vec(dim, 3, 2), rng.rational(2, 1));
        return power(affine_expr(rng.vec(dim, 2, 1), rng.rational(1, 1)),
                     static_cast<int>(rng.range(2, 3)));
    };
    const long pick = depth <= 0 ? 0 : rng.range(0, 4);
    switch (pick) {
        case 0: return smooth_atom();
        case 1: return abs_of(smooth_atom());
        case 2:
        case 3: {
            std::vector<Expr> parts;
            const long n = rng.range(2, 3);
            for (long i = 0; i < n; ++i) parts.push_back(smooth_atom());
            return pick == 2 ? max_of(std::move(parts)) : min_of(std::move(parts));
        }
        default: {
            std::vector<Expr> parts;
            parts.push_back(random_clarke_expr(rng, dim, depth - 1));
            parts.push_back(random_clarke_expr(rng, dim, depth - 1));
            return sum(std::move(parts));
        }
    }
}

} // namespace suitedetail

// Two legs. Numeric: on 50 instances with controlled curvature (smooth
// max-of-quadratics points with a fat dominance margin, and exact
// piecewise-linear kinks), the sampled generalized directional derivative
// never exceeds the support function of the computed gradient set by more
// than 1e-4. Exact: on 50 random pairs from the full fragment, the sum rule
// holds as an exact polytope containment (the gradient set of f + g sits
// inside the Minkowski sum).
inline SuiteResult suite_clarke_bounds(std::uint64_t seed) {
    SuiteResult out;
    out.suite = "clarke-bounds";
    out.seed = seed;
    suitedetail::Rng rng(seed);
    suitedetail::Tally t{&out};
    const double tol = 1e-4;

    auto quad_branch = [&](std::size_t dim) {
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < dim; ++i)
            terms.push_back(scalar_mult(rng.rational(2, 2), power(variable(i), 2)));
        terms.push_back(suitedetail::affine_expr(rng.vec(dim, 1, 2), rng.rational(2, 2)));
        return sum(std::move(terms));
    };

    int numeric_done = 0;
    while (numeric_done < 50) {
        const std::size_t dim = static_cast<std::size_t>(rng.range(1, 3));
        Expr f;
        Vec x = rng.vec(dim, 2, 2);
        if (numeric_done % 2 == 0) {
            // Smooth point of a max of quadratics: exactly one branch within
            // 1/4 of the top, so the probe ball stays on one branch.
            const long nb = rng.range(2, 3);
            std::vector<Expr> branches;
            for (long b = 0; b < nb; ++b) branches.push_back(quad_branch(dim));
            std::vector<Rational> vals;
            Rational top;
            for (long b = 0; b < nb; ++b) {
                vals.push_back(eval(branches[static_cast<std::size_t>(b)], x).rat());
                if (b == 0 || vals.back() > top) top = vals.back();
            }
            int near_top = 0;
            for (const auto& v : vals)
                if (top - v < Rational(1, 4)) ++near_top;
            if (near_top != 1) continue;
            f = max_of(std::move(branches));
        } else {
            // Deliberate kink: affine branches shifted to tie exactly at x,
            // so every branch gradient enters the hull and the piecewise
            // linear quotients cannot exceed the support function.
            const long nb = rng.range(2, 4);
            std::vector<Expr> branches;
            for (long b = 0; b < nb; ++b) {
                const Vec a = rng.vec(dim, 2, 1);
                branches.push_back(suitedetail::affine_expr(a, -dot(a, x)));
            }
            f = max_of(std::move(branches));
        }
        ++numeric_done;
        ++out.instances;
        const ClarkeGradient gf = clarke_subdifferential(f, x);
        for (int k = 0; k < 2; ++k) {
            const Vec v = rng.nonzero_vec(dim, 1, 2);
            const DirDeriv fo = fo_numeric(f, x, v);
            t.require(fo.estimate <= static_cast<double>(clarke_directional(gf, v)) + tol,
                      "instance " + std::to_string(numeric_done) +
                          ": numeric generalized derivative bound along " + format_vec(v));
        }
    }

    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t dim = static_cast<std::size_t>(rng.range(1, 2));
        const Expr f = suitedetail::random_clarke_expr(rng, dim, 1);
        const Expr g = suitedetail::random_clarke_expr(rng, dim, 1);
        const Vec x = rng.vec(dim, 2, 2);
        ++out.instances;
        const ClarkeGradient gf = clarke_subdifferential(f, x);
        const ClarkeGradient gg = clarke_subdifferential(g, x);
        const ClarkeGradient gsum = clarke_subdifferential(sum({f, g}), x);
        const ContainsResult c = polytope_contains(minkowski_sum(gf.set, gg.set), gsum.set);
        t.require(c.contained, "pair " + std::to_string(trial) +
                                   ": sum rule containment at " + format_vec(x));
    }
    out.passed = (t.fail_count == 0);
    return out;
}

// --- 8. Constraint qualification audit ------------------------------------------

// 100 random smooth instances: half engineered to satisfy LICQ (echelon
// gradients), a third carrying a Slater witness, the rest arbitrary. The
// audit must report zero refuted implication arrows.
inline SuiteResult suite_cq_audit(std::uint64_t seed) {
    SuiteResult out;
    out.suite = "cq-audit";
    out.seed = seed;
    suitedetail::Rng rng(seed);
    suitedetail::Tally t{&out};
    std::vector<SmoothCqInstance> corpus;

    for (int i = 0; i < 50; ++i) {  // LICQ by construction
        const std::size_t dim = static_cast<std::size_t>(rng.range(2, 4));
        const std::size_t total = 1 + rng.below(dim);
        const std::size_t neq = rng.below(std::min<std::size_t>(total, 2) + 1);
        SmoothProblemAtPoint at;
        at.dim = dim;
        at.xstar = vzero(dim);
        at.grad_f = rng.vec(dim, 3, 1);
        at.num_ineqs = total - neq;
        for (std::size_t r = 0; r < total; ++r) {
            Vec row = vzero(dim);
            for (std::size_t c0 = r + 1; c0 < dim; ++c0) row[c0] = rng.rational(2, 1);
            Rational diag = rng.rational(3, 1);
            if (diag == 0) diag = 1;
            row[r] = diag;
            if (r < total - neq) {
                at.active.push_back(r);
                at.grad_g_active.push_back(std::move(row));
            } else {
                at.grad_h.push_back(std::move(row));
            }
        }
        corpus.push_back({at, std::nullopt, std::nullopt});
    }

    for (int i = 0; i < 30; ++i) {  // Slater witness by construction
        const std::size_t dim = static_cast<std::size_t>(rng.range(1, 3));
        const Vec xstar = rng.vec(dim, 2, 1);
        Vec x0 = rng.vec(dim, 2, 1);
        if (x0 == xstar) x0[0] += 1;
        Program prog;
        prog.dim = dim;
        prog.objective = suitedetail::affine_expr(rng.vec(dim, 2, 1), Rational(0));
        SmoothProblemAtPoint at;
        at.dim = dim;
        at.xstar = xstar;
        at.grad_f = rng.vec(dim, 2, 1);
        const long m = rng.range(1, 3);
        for (long k = 0; k < m; ++k) {
            Vec a;
            for (;;) {  // orient a so that x0 is strictly inside
                a = rng.nonzero_vec(dim, 3, 1);
                const Rational d = dot(a, vsub(x0, xstar));
                if (d == 0) continue;
                if (d > 0) a = vneg(a);
                break;
            }
            prog.ineqs.push_back(suitedetail::affine_expr(a, -dot(a, xstar)));
            at.active.push_back(static_cast<std::size_t>(k));
            at.grad_g_active.push_back(a);
        }
        at.num_ineqs = prog.ineqs.size();
        corpus.push_back({at, prog, x0});
    }

    for (int i = 0; i < 20; ++i) {  // arbitrary gradients
        const std::size_t dim = static_cast<std::size_t>(rng.range(1, 4));
        SmoothProblemAtPoint at;
        at.dim = dim;
        at.xstar = rng.vec(dim, 2, 1);
        at.grad_f = rng.vec(dim, 3, 1);
        const std::size_t na = rng.below(4);
        for (std::size_t k = 0; k < na; ++k) {
            at.active.push_back(k);
            at.grad_g_active.push_back(rng.vec(dim, 2, 1));
        }
        at.num_ineqs = na;
        if (rng.coin()) at.grad_h.push_back(rng.vec(dim, 2, 1));
        corpus.push_back({at, std::nullopt, std::nullopt});
    }

    out.instances = corpus.size();
    const CqAuditReport report = cq_implication_audit(corpus);
    t.require(report.violations.empty(), "implication audit reports no violated arrows");
    for (const auto& v : report.violations)
        if (out.failures.size() < 8) out.failures.push_back("audit: " + v);
    t.require(report.licq_holds >= 50,
              "the engineered echelon instances all satisfy the independence CQ");
    t.require(report.slater_checked >= 30 && report.slater_holds == report.slater_checked,
              "every instance with a strict witness passes the Slater check");
    out.checked += corpus.size();  // each instance audited along every arrow
    out.passed = (t.fail_count == 0);
    return out;
}

// --- 9. Set-valued minimizer chain ----------------------------------------------

// 200 random sampled maps with pointed ordering cones: the classifier's
// strong / minimal / weak flags are recomputed here by brute force over the
// image points, and the implication chain strong => minimal => weak must
// never break.
inline SuiteResult suite_setvalued_chain(std::uint64_t seed) {
    SuiteResult out;
    out.suite = "setvalued-chain";
    out.seed = seed;
    suitedetail::Rng rng(seed);
    suitedetail::Tally t{&out};
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = static_cast<std::size_t>(rng.range(1, 3));
        FGCone base;
        if (d == 2 && rng.coin()) {
            base.dim = 2;
            base.rays = {Vec{Rational(1), Rational(0)}, Vec{Rational(1), Rational(1)}};
        } else {
            base = suitedetail::orthant(d);
        }
        const OrderingCone cy = make_ordering_cone(base);

        std::vector<std::pair<Vec, std::vector<Vec>>> entries;
        std::vector<Vec> feasible;
        const long nargs = rng.range(1, 3);
        for (long a = 0; a < nargs; ++a) {
            const Vec arg{Rational(a)};
            std::vector<Vec> image;
            const long npts = rng.range(1, 5);
            for (long p = 0; p < npts; ++p) image.push_back(rng.vec(d, 3, 1));
            entries.emplace_back(arg, std::move(image));
            feasible.push_back(arg);
        }
        const SampledSetValuedMap f = make_sampled_map(1, d, entries);
        const Vec xstar = feasible[rng.below(feasible.size())];
        const std::vector<Vec>& image = *f.lookup(xstar);
        const Vec ystar = image[rng.below(image.size())];
        ++out.instances;

        const MinimizerClassification cls = classify_point(f, feasible, xstar, ystar, cy);

        std::vector<Vec> all_points;
        for (const auto& x : feasible)
            for (const auto& w : *f.lookup(x)) all_points.push_back(w);
        bool strong_bf = true, minimal_bf = true;
        bool weak_violated = false;
        for (const auto& w : all_points) {
            if (!leq_cone(ystar, w, cy)) strong_bf = false;
            if (leq_cone(w, ystar, cy) && !leq_cone(ystar, w, cy)) minimal_bf = false;
            if (interior_member(cy, vsub(ystar, w))) weak_violated = true;
        }
        const std::string tag = "map " + std::to_string(trial);
        t.require(cls.strong == strong_bf, tag + ": strong flag matches brute force");
        t.require(cls.minimal == minimal_bf, tag + ": minimal flag matches brute force");
        if (cy.interior_nonempty) {
            t.require(cls.weak.has_value() && *cls.weak == !weak_violated,
                      tag + ": weak flag matches brute force");
        }
        t.require(!cls.strong || cls.minimal, tag + ": strong implies minimal");
        if (cls.weak.has_value())
            t.require(!cls.minimal || *cls.weak, tag + ": minimal implies weak");
    }
    out.passed = (t.fail_count == 0);
    return out;
}

// --- dispatcher -----------------------------------------------------------------

inline SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
    if (name == "ekeland-spaces") return suite_ekeland_spaces(seed);
    if (name == "cone-biduality") return suite_cone_biduality(seed);
    if (name == "polytope-support") return suite_polytope_support(seed);
    if (name == "subdiff-consistency") return suite_subdiff_consistency(seed);
    if (name == "fj-necessity") return suite_fj_necessity(seed);
    if (name == "qd-directional") return suite_qd_directional(seed);
    if (name == "clarke-bounds") return suite_clarke_bounds(seed);
    if (name == "cq-audit") return suite_cq_audit(seed);
    if (name == "setvalued-chain") return suite_setvalued_chain(seed);
    throw InputError("unknown property suite '" + name + "'");
}

} // namespace optcert
