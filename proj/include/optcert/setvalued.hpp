#pragma once

// Set-valued optimality machinery over exact rational data: partial orders
// induced by finitely generated pointed cones, the minimizer taxonomy
// (strong / minimal / weak) for sampled set-valued maps, a sampled
// cone-convexity check with exact falsification, and a multiplier search for
// polyhedral set-valued programs. Everything is a finite-dimensional
// polyhedral instantiation: the tangent cone of the polyhedral epigraph
// stands in for the contingent epiderivative (exact for polyhedra), and the
// multiplier pair (t, u) is recovered from the Farkas dual of that cone, then
// cross-checked against independently enumerated generators.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "optcert/errors.hpp"
#include "optcert/geometry.hpp"
#include "optcert/lp.hpp"
#include "optcert/rational.hpp"

namespace optcert {

// --- generator enumeration for half-space cones -------------------------------

namespace detail {

// Scale so the first nonzero entry has absolute value 1 (rays keep their
// sign; lines are additionally flipped so the first nonzero entry is +1).
inline Vec canonical_ray(Vec v) {
    for (const auto& x : v)
        if (x != 0) {
            const Rational s = abs(x);
            for (auto& y : v) y /= s;
            break;
        }
    return v;
}

inline Vec canonical_line(Vec v) {
    v = canonical_ray(std::move(v));
    for (const auto& x : v) {
        if (x > 0) break;
        if (x < 0) return vneg(v);
    }
    return v;
}

inline void prune_cone_generators(FGCone& c) {
    for (auto& l : c.lines) l = canonical_line(std::move(l));
    std::vector<Vec> rays;
    for (auto& r : c.rays) {
        if (is_zero(r)) continue;
        rays.push_back(canonical_ray(std::move(r)));
    }
    dedupe(rays);
    c.rays = std::move(rays);
    // Drop rays that the remaining generators already span conically.
    for (std::size_t i = 0; i < c.rays.size();) {
        FGCone rest = c;
        rest.rays.erase(rest.rays.begin() + static_cast<std::ptrdiff_t>(i));
        if (cone_member(rest, c.rays[i]))
            c.rays.erase(c.rays.begin() + static_cast<std::ptrdiff_t>(i));
        else
            ++i;
    }
}

} // namespace detail

// Exact double-description sweep: V-form generators (rays and lineality) of
// the homogeneous cone { d : <a, d> <= 0 for a in le_rows, <b, d> = 0 for b
// in eq_rows }. Intended for the small cones arising here; every step is
// exact rational arithmetic and redundant rays are pruned as they appear.
inline FGCone enumerate_cone_generators(std::size_t dim, const std::vector<Vec>& le_rows,
                                        const std::vector<Vec>& eq_rows) {
    if (dim == 0) throw InputError("cone enumeration: dimension must be positive");
    for (const auto& a : le_rows) require_dim(a, dim, "cone <= row");
    for (const auto& b : eq_rows) require_dim(b, dim, "cone = row");

    FGCone c;
    c.dim = dim;
    for (std::size_t i = 0; i < dim; ++i) {
        Vec l = vzero(dim);
        l[i] = 1;
        c.lines.push_back(std::move(l));
    }

    std::vector<std::pair<Vec, bool>> constraints;  // (normal, is_inequality)
    for (const auto& b : eq_rows) constraints.emplace_back(b, false);
    for (const auto& a : le_rows) constraints.emplace_back(a, true);

    for (const auto& [a, is_ineq] : constraints) {
        if (is_zero(a)) continue;
        std::size_t pivot = c.lines.size();
        for (std::size_t i = 0; i < c.lines.size(); ++i)
            if (dot(a, c.lines[i]) != 0) {
                pivot = i;
                break;
            }
        if (pivot != c.lines.size()) {
            // A lineality direction crosses the constraint: project everything
            // else onto the hyperplane and keep the feasible half as a ray.
            Vec l0 = c.lines[pivot];
            c.lines.erase(c.lines.begin() + static_cast<std::ptrdiff_t>(pivot));
            const Rational al0 = dot(a, l0);
            for (auto& l : c.lines) l = vsub(l, vscale(dot(a, l) / al0, l0));
            for (auto& r : c.rays) r = vsub(r, vscale(dot(a, r) / al0, l0));
            if (is_ineq) {
                if (al0 > 0) l0 = vneg(l0);
                c.rays.push_back(std::move(l0));
            }
        } else {
            std::vector<Vec> keep, pos, neg;
            for (auto& r : c.rays) {
                const int s = (dot(a, r) > 0) ? 1 : (dot(a, r) < 0 ? -1 : 0);
                if (s == 0) keep.push_back(std::move(r));
                else if (s > 0) pos.push_back(std::move(r));
                else neg.push_back(std::move(r));
            }
            std::vector<Vec> next = keep;
            if (is_ineq) next.insert(next.end(), neg.begin(), neg.end());
            for (const auto& p : pos)
                for (const auto& n : neg) {
                    Vec w = vadd(vscale(dot(a, p), n), vscale(-dot(a, n), p));
                    if (!is_zero(w)) next.push_back(std::move(w));
                }
            c.rays = std::move(next);
        }
        detail::prune_cone_generators(c);
    }
    return c;
}

// --- ordering cones -----------------------------------------------------------

// A partial-order-inducing cone together with its verified structure: the
// support rows are the generators of the (negative) polar cone; a point is
// interior exactly when it is strictly negative against every support row.
struct OrderingCone {
    FGCone cone;
    bool pointed = false;
    bool interior_nonempty = false;
    std::vector<Vec> support_rows;     // rays of the polar cone
    std::optional<Vec> interior_point; // witness when interior_nonempty
};

inline OrderingCone make_ordering_cone(FGCone cone) {
    if (cone.dim == 0) throw InputError("ordering cone: dimension must be positive");
    for (const auto& r : cone.rays) require_dim(r, cone.dim, "ordering cone ray");
    for (const auto& l : cone.lines) require_dim(l, cone.dim, "ordering cone line");
    OrderingCone oc;
    oc.cone = std::move(cone);

    // Pointed: no nonzero generator's negation may belong back to the cone.
    oc.pointed = true;
    for (const auto& l : oc.cone.lines)
        if (!is_zero(l)) oc.pointed = false;
    if (oc.pointed)
        for (const auto& r : oc.cone.rays)
            if (!is_zero(r) && cone_member(oc.cone, vneg(r))) {
                oc.pointed = false;
                break;
            }

    // Support rows: generators of the polar, by enumeration of its
    // half-space form. A nonzero polar line flattens the cone into a
    // hyperplane, so the interior is empty in that case.
    const HPolyhedron polar = polar_cone(oc.cone);
    std::vector<Vec> le, eq;
    for (const auto& row : polar.ineqs) le.push_back(row.normal);
    for (const auto& row : polar.eqs) eq.push_back(row.normal);
    FGCone polar_gens = enumerate_cone_generators(oc.cone.dim, le, eq);
    oc.support_rows = polar_gens.rays;
    for (const auto& l : polar_gens.lines) {
        oc.support_rows.push_back(l);
        oc.support_rows.push_back(vneg(l));
    }

    // Interior via an LP with strict slack on the support rows: maximize s
    // subject to <a, v> + s <= 0 over all support rows, |v_k| <= 1, s <= 1.
    const std::size_t n = oc.cone.dim;
    std::vector<LPRow> rows;
    for (const auto& a : oc.support_rows) {
        LPRow row;
        row.coeffs = a;
        row.coeffs.push_back(1);
        row.rhs = 0;
        row.sense = RowSense::LE;
        rows.push_back(std::move(row));
    }
    for (std::size_t k = 0; k <= n; ++k) {
        LPRow up;
        up.coeffs = vzero(n + 1);
        up.coeffs[k] = 1;
        up.rhs = 1;
        up.sense = RowSense::LE;
        rows.push_back(std::move(up));
        if (k < n) {
            LPRow down;
            down.coeffs = vzero(n + 1);
            down.coeffs[k] = -1;
            down.rhs = 1;
            down.sense = RowSense::LE;
            rows.push_back(std::move(down));
        }
    }
    Vec objective = vzero(n + 1);
    objective[n] = 1;
    auto lp = solve_lp(static_cast<int>(n + 1), rows, objective, ObjSense::Maximize,
                       std::vector<bool>(n + 1, false));
    if (lp.status != LPStatus::Optimal)
        throw Error("ordering cone interior LP: expected an optimum (the box bounds it)");
    oc.interior_nonempty = lp.value > 0;
    if (oc.interior_nonempty)
        oc.interior_point =
            Vec(lp.solution.begin(), lp.solution.begin() + static_cast<std::ptrdiff_t>(n));
    return oc;
}

// b - a belongs to the cone: the partial order induced by C.
inline bool leq_cone(const Vec& a, const Vec& b, const OrderingCone& c) {
    require_dim(a, c.cone.dim, "ordered point");
    require_dim(b, c.cone.dim, "ordered point");
    return cone_member(c.cone, vsub(b, a));
}

// Strict interior membership, characterized by strict negativity against
// every support row (vacuously true for the full-space cone).
inline bool interior_member(const OrderingCone& c, const Vec& v) {
    require_dim(v, c.cone.dim, "interior point");
    if (!c.interior_nonempty) return false;
    for (const auto& a : c.support_rows)
        if (!(dot(a, v) < 0)) return false;
    return true;
}

// p lies in the order interval [a, b] = ({a} + C) cap ({b} - C).
inline bool order_interval_member(const Vec& p, const Vec& a, const Vec& b,
                                  const OrderingCone& c) {
    if (!leq_cone(a, b, c))
        throw PreconditionError("order interval is empty: the endpoints are not ordered");
    return leq_cone(a, p, c) && leq_cone(p, b, c);
}

// --- sampled set-valued maps ----------------------------------------------------

struct SampledSetValuedMap {
    std::size_t arg_dim = 0;
    std::size_t image_dim = 0;
    std::vector<std::pair<Vec, std::vector<Vec>>> entries;

    const std::vector<Vec>* lookup(const Vec& x) const {
        for (const auto& [arg, image] : entries)
            if (arg == x) return &image;
        return nullptr;
    }
};

inline SampledSetValuedMap make_sampled_map(
    std::size_t arg_dim, std::size_t image_dim,
    std::vector<std::pair<Vec, std::vector<Vec>>> entries) {
    SampledSetValuedMap f;
    f.arg_dim = arg_dim;
    f.image_dim = image_dim;
    for (const auto& [arg, image] : entries) {
        require_dim(arg, arg_dim, "map argument");
        if (image.empty())
            throw InputError("set-valued map has an empty image at " + format_vec(arg));
        for (const auto& y : image) require_dim(y, image_dim, "map image point");
    }
    f.entries = std::move(entries);
    return f;
}

// --- minimizer taxonomy ---------------------------------------------------------

enum class MinimizerLabel { Strong, Minimal, Weak, WeakInconclusive, None };

inline const char* to_string(MinimizerLabel l) {
    switch (l) {
        case MinimizerLabel::Strong: return "strong";
        case MinimizerLabel::Minimal: return "minimal";
        case MinimizerLabel::Weak: return "weak";
        case MinimizerLabel::WeakInconclusive: return "weak-inconclusive";
        case MinimizerLabel::None: return "none";
    }
    return "?";
}

struct MinimizerClassification {
    MinimizerLabel label = MinimizerLabel::None;
    bool strong = false;
    bool minimal = false;
    // Empty when the cone has no interior: the strict test is then vacuous
    // and the weak label is reported inconclusive instead.
    std::optional<bool> weak;
};

// Classifies (x*, y*) against the image set F(S) = union of F(x) over the
// feasible arguments. The three predicates are computed independently and
// the implication chain strong => minimal => weak is asserted before the
// strongest applicable label is returned.
inline MinimizerClassification classify_point(const SampledSetValuedMap& f,
                                              const std::vector<Vec>& feasible, const Vec& xstar,
                                              const Vec& ystar, const OrderingCone& cy) {
    if (!cy.pointed) throw InputError("classify_point: the ordering cone must be pointed");
    require_dim(ystar, f.image_dim, "y*");
    bool xstar_feasible = false;
    for (const auto& x : feasible)
        if (x == xstar) xstar_feasible = true;
    if (!xstar_feasible) throw PreconditionError("x* is not in the feasible list");
    const auto* image_at_xstar = f.lookup(xstar);
    if (!image_at_xstar) throw PreconditionError("x* is not a sampled argument of the map");
    if (std::find(image_at_xstar->begin(), image_at_xstar->end(), ystar) ==
        image_at_xstar->end())
        throw PreconditionError("y* is not an image point of the map at x*");

    std::vector<Vec> image_set;
    for (const auto& x : feasible) {
        const auto* img = f.lookup(x);
        if (!img) throw PreconditionError("feasible argument " + format_vec(x) + " is unsampled");
        image_set.insert(image_set.end(), img->begin(), img->end());
    }

    MinimizerClassification r;
    r.strong = true;
    r.minimal = true;
    bool weak = true;
    for (const auto& p : image_set) {
        const bool above = leq_cone(ystar, p, cy);   // p in {y*} + C
        const bool below = leq_cone(p, ystar, cy);   // p in {y*} - C
        if (!above) r.strong = false;
        if (below && !above) r.minimal = false;
        if (interior_member(cy, vsub(ystar, p))) weak = false;
    }
    if (cy.interior_nonempty) r.weak = weak;

    if (r.strong && !r.minimal)
        throw Error("minimizer taxonomy: strong holds but minimal fails (internal bug)");
    if (r.weak.has_value() && r.minimal && !*r.weak)
        throw Error("minimizer taxonomy: minimal holds but weak fails (internal bug)");

    if (r.strong) r.label = MinimizerLabel::Strong;
    else if (r.minimal) r.label = MinimizerLabel::Minimal;
    else if (!r.weak.has_value()) r.label = MinimizerLabel::WeakInconclusive;
    else r.label = *r.weak ? MinimizerLabel::Weak : MinimizerLabel::None;
    return r;
}

// --- sampled cone-convexity -----------------------------------------------------

struct ConvexityWitness {
    Vec x1, x2;
    Rational lambda;
    Vec p1, p2;   // image points at x1 and x2
    Vec combo;    // lambda p1 + (1 - lambda) p2, not covered at the mixed argument
};

struct ConvexityReport {
    bool convex_on_samples = true;
    std::optional<ConvexityWitness> witness;
    std::size_t checked = 0;  // (pair, lambda, image point) combinations verified
    std::size_t skipped = 0;  // mixed arguments that are not sampled
    std::string note;
};

// Samples the defining inclusion lambda F(x1) + (1-lambda) F(x2) subset of
// F(lambda x1 + (1-lambda) x2) + C over all sampled argument pairs and
// lambda in {0, 1/4, 1/2, 3/4, 1}. A returned witness is an exact
// counterexample; a positive answer is only as strong as the sample grid.
inline ConvexityReport cone_convexity_check(const SampledSetValuedMap& f,
                                            const std::vector<Vec>& domain_samples,
                                            const OrderingCone& cy) {
    for (const auto& [arg, image] : f.entries) {
        (void)image;
        if (std::find(domain_samples.begin(), domain_samples.end(), arg) == domain_samples.end())
            throw InputError("map argument " + format_vec(arg) +
                             " is outside the sampled domain");
    }
    ConvexityReport rep;
    rep.note = "falsification is exact; the positive answer is limited to the sampled "
               "arguments and the lambda grid {0, 1/4, 1/2, 3/4, 1}";
    const std::vector<Rational> lambdas = {Rational(0), Rational(1, 4), Rational(1, 2),
                                           Rational(3, 4), Rational(1)};
    for (std::size_t i = 0; i < f.entries.size(); ++i)
        for (std::size_t j = i + 1; j < f.entries.size(); ++j)
            for (const auto& lam : lambdas) {
                const Vec& x1 = f.entries[i].first;
                const Vec& x2 = f.entries[j].first;
                const Vec mixed = vadd(vscale(lam, x1), vscale(1 - lam, x2));
                const auto* image_mixed = f.lookup(mixed);
                if (!image_mixed) {
                    ++rep.skipped;
                    continue;
                }
                for (const auto& p1 : f.entries[i].second)
                    for (const auto& p2 : f.entries[j].second) {
                        const Vec combo = vadd(vscale(lam, p1), vscale(1 - lam, p2));
                        bool covered = false;
                        for (const auto& q : *image_mixed)
                            if (cone_member(cy.cone, vsub(combo, q))) {
                                covered = true;
                                break;
                            }
                        ++rep.checked;
                        if (!covered) {
                            rep.convex_on_samples = false;
                            rep.witness = ConvexityWitness{x1, x2, lam, p1, p2, combo};
                            return rep;
                        }
                    }
            }
    return rep;
}

// --- polyhedral multiplier search ----------------------------------------------

// A set-valued program collapsed to polyhedral data: the epigraph of the
// objective/constraint pair lives in stacked (x, y, z) coordinates, the base
// point is an epigraph point with z* in -C_Z, and the argument domain is a
// polyhedron in x.
struct PolyhedralInstance {
    std::size_t dim_x = 0, dim_y = 0, dim_z = 0;
    HPolyhedron epi;     // over (x, y, z), stacked in that order
    Vec xstar, ystar, zstar;
    OrderingCone cone_y;
    OrderingCone cone_z;
    HPolyhedron s_hat;   // over x
};

struct SetValuedFJResult {
    bool found = false;       // a nonzero admissible (t, u) exists
    Vec t, u;                 // normalized so sum of |components| equals 1
    bool regularity = false;  // generator-level surrogate of the rank condition
    bool epiderivative_defined = true;
    FGCone directions;        // enumerated generators of the restricted tangent cone
    std::string note;
};

namespace detail {

inline Vec subvec(const Vec& v, std::size_t lo, std::size_t hi) {
    return Vec(v.begin() + static_cast<std::ptrdiff_t>(lo),
               v.begin() + static_cast<std::ptrdiff_t>(hi));
}

} // namespace detail

// Searches for multipliers t in C_Y^+, u in C_Z^+ with (t, u) != 0,
// u(z*) = 0, and <t, dy> + <u, dz> >= 0 for every direction (dx, dy, dz) of
// the epigraph's tangent cone whose x-part is tangent to the argument
// domain. The search runs over the Farkas dual of that cone in half-space
// form; the result is then re-verified against independently enumerated
// generators. The regularity surrogate checks that the z-parts of the
// enumerated directions together with C_Z's generators and z* span Z; when
// it holds, a multiplier with t != 0 is required.
inline SetValuedFJResult sv_fritz_john(const PolyhedralInstance& inst) {
    const std::size_t dx = inst.dim_x, dy = inst.dim_y, dz = inst.dim_z;
    if (dx == 0 || dy == 0 || dz == 0)
        throw InputError("set-valued instance: all spaces must have positive dimension");
    if (inst.epi.dim != dx + dy + dz)
        throw InputError("set-valued instance: epigraph dimension must be dim_x+dim_y+dim_z");
    if (inst.s_hat.dim != dx)
        throw InputError("set-valued instance: domain polyhedron must live in x-space");
    if (inst.cone_y.cone.dim != dy || inst.cone_z.cone.dim != dz)
        throw InputError("set-valued instance: ordering cone dimensions do not match");
    if (!inst.cone_y.pointed || !inst.cone_z.pointed)
        throw InputError("set-valued instance: ordering cones must be pointed");
    require_dim(inst.xstar, dx, "x*");
    require_dim(inst.ystar, dy, "y*");
    require_dim(inst.zstar, dz, "z*");

    Vec base = inst.xstar;
    base.insert(base.end(), inst.ystar.begin(), inst.ystar.end());
    base.insert(base.end(), inst.zstar.begin(), inst.zstar.end());
    if (auto bad = inst.epi.violated_row(base))
        throw PreconditionError("base point is outside the epigraph polyhedron, violates " +
                                *bad);
    if (auto bad = inst.s_hat.violated_row(inst.xstar))
        throw PreconditionError("x* is outside the argument domain, violates " + *bad);
    if (!cone_member(inst.cone_z.cone, vneg(inst.zstar)))
        throw PreconditionError("z* is not in -C_Z");

    // Tangent cone of the epigraph, restricted to x-directions tangent to
    // the argument domain, in half-space form.
    const std::size_t n = dx + dy + dz;
    auto tn_epi = tangent_normal_cones(inst.epi, base);
    auto tn_dom = tangent_normal_cones(inst.s_hat, inst.xstar);
    std::vector<Vec> le_rows, eq_rows;
    for (const auto& row : tn_epi.tangent.ineqs) le_rows.push_back(row.normal);
    for (const auto& row : tn_epi.tangent.eqs) eq_rows.push_back(row.normal);
    for (const auto& row : tn_dom.tangent.ineqs) {
        Vec lifted = row.normal;
        lifted.resize(n, Rational(0));
        le_rows.push_back(std::move(lifted));
    }
    for (const auto& row : tn_dom.tangent.eqs) {
        Vec lifted = row.normal;
        lifted.resize(n, Rational(0));
        eq_rows.push_back(std::move(lifted));
    }

    SetValuedFJResult out;
    out.note = "finite-dimensional polyhedral instantiation: the epigraph's tangent cone "
               "stands in for the contingent epiderivative";
    out.directions = enumerate_cone_generators(n, le_rows, eq_rows);

    // Generator-level definedness probe: two directions with the same
    // (x, z)-part whose y-parts are incomparable under C_Y witness that no
    // single y-value can represent that direction. Directions contributed by
    // the ordering cones themselves (x = 0, y in C_Y, z in C_Z) are skipped:
    // every epigraph contains those.
    {
        std::vector<Vec> gens = out.directions.rays;
        for (const auto& l : out.directions.lines) {
            gens.push_back(l);
            gens.push_back(vneg(l));
        }
        auto is_cone_direction = [&](const Vec& g) {
            return is_zero(detail::subvec(g, 0, dx)) &&
                   cone_member(inst.cone_y.cone, detail::subvec(g, dx, dx + dy)) &&
                   cone_member(inst.cone_z.cone, detail::subvec(g, dx + dy, n));
        };
        for (std::size_t i = 0; i < gens.size() && out.epiderivative_defined; ++i)
            for (std::size_t j = i + 1; j < gens.size(); ++j) {
                if (is_cone_direction(gens[i]) && is_cone_direction(gens[j])) continue;
                if (detail::subvec(gens[i], 0, dx) != detail::subvec(gens[j], 0, dx)) continue;
                if (detail::subvec(gens[i], dx + dy, n) != detail::subvec(gens[j], dx + dy, n))
                    continue;
                const Vec yi = detail::subvec(gens[i], dx, dx + dy);
                const Vec yj = detail::subvec(gens[j], dx, dx + dy);
                if (!cone_member(inst.cone_y.cone, vsub(yi, yj)) &&
                    !cone_member(inst.cone_y.cone, vsub(yj, yi))) {
                    out.epiderivative_defined = false;
                    out.note += "; epiderivative undefined at generator level: two tangent "
                                "directions share an (x, z)-part with incomparable y-parts";
                    break;
                }
            }
    }

    // Regularity surrogate: the z-parts of the restricted tangent
    // directions, C_Z's generators, and z* must jointly span Z.
    {
        Mat zparts;
        for (const auto& r : out.directions.rays) zparts.push_back(detail::subvec(r, dx + dy, n));
        for (const auto& l : out.directions.lines)
            zparts.push_back(detail::subvec(l, dx + dy, n));
        for (const auto& g : inst.cone_z.cone.rays) zparts.push_back(g);
        zparts.push_back(inst.zstar);
        out.regularity = static_cast<std::size_t>(matrix_rank(zparts)) == dz;
    }

    // Multiplier LP over (gamma >= 0, delta free, t free, u free):
    //   -A^T gamma + B^T delta = (0_x, t, u)   (Farkas dual of the cone)
    //   <t, g> >= 0 for C_Y generators, <u, g> >= 0 for C_Z generators
    //   <u, z*> = 0, |t_i| <= 1, |u_j| <= 1.
    const std::size_t nl = le_rows.size(), ne = eq_rows.size();
    const std::size_t num_vars = nl + ne + dy + dz;
    const std::size_t t_base = nl + ne, u_base = nl + ne + dy;
    std::vector<LPRow> rows;
    for (std::size_t coord = 0; coord < n; ++coord) {
        LPRow row;
        row.coeffs = vzero(num_vars);
        for (std::size_t i = 0; i < nl; ++i) row.coeffs[i] = -le_rows[i][coord];
        for (std::size_t j = 0; j < ne; ++j) row.coeffs[nl + j] = eq_rows[j][coord];
        if (coord >= dx && coord < dx + dy) row.coeffs[t_base + (coord - dx)] = -1;
        if (coord >= dx + dy) row.coeffs[u_base + (coord - dx - dy)] = -1;
        row.rhs = 0;
        row.sense = RowSense::EQ;
        rows.push_back(std::move(row));
    }
    for (const auto& g : inst.cone_y.cone.rays) {
        LPRow row;
        row.coeffs = vzero(num_vars);
        for (std::size_t i = 0; i < dy; ++i) row.coeffs[t_base + i] = -g[i];
        row.rhs = 0;
        row.sense = RowSense::LE;
        rows.push_back(std::move(row));
    }
    for (const auto& g : inst.cone_z.cone.rays) {
        LPRow row;
        row.coeffs = vzero(num_vars);
        for (std::size_t j = 0; j < dz; ++j) row.coeffs[u_base + j] = -g[j];
        row.rhs = 0;
        row.sense = RowSense::LE;
        rows.push_back(std::move(row));
    }
    {
        LPRow row;
        row.coeffs = vzero(num_vars);
        for (std::size_t j = 0; j < dz; ++j) row.coeffs[u_base + j] = inst.zstar[j];
        row.rhs = 0;
        row.sense = RowSense::EQ;
        rows.push_back(std::move(row));
    }
    for (std::size_t k = 0; k < dy + dz; ++k) {
        for (const int sgn : {1, -1}) {
            LPRow row;
            row.coeffs = vzero(num_vars);
            row.coeffs[t_base + k] = sgn;
            row.rhs = 1;
            row.sense = RowSense::LE;
            rows.push_back(std::move(row));
        }
    }
    std::vector<bool> nonneg(num_vars, false);
    for (std::size_t i = 0; i < nl; ++i) nonneg[i] = true;

    // Push each multiplier component away from zero in turn, t first so the
    // regularity assertion gets its chance, and keep the first success.
    out.t = vzero(dy);
    out.u = vzero(dz);
    bool t_can_be_nonzero = false;
    for (std::size_t k = 0; k < dy + dz && !out.found; ++k) {
        for (const int sgn : {1, -1}) {
            Vec objective = vzero(num_vars);
            objective[t_base + k] = sgn;
            auto lp = solve_lp(static_cast<int>(num_vars), rows, objective, ObjSense::Maximize,
                               nonneg);
            if (lp.status != LPStatus::Optimal)
                throw Error("set-valued multiplier LP: expected an optimum (boxed)");
            if (lp.value > 0) {
                Vec t = detail::subvec(lp.solution, t_base, t_base + dy);
                Vec u = detail::subvec(lp.solution, u_base, u_base + dz);
                Rational total = 0;
                for (const auto& v : t) total += abs(v);
                for (const auto& v : u) total += abs(v);
                out.t = vscale(1 / total, t);
                out.u = vscale(1 / total, u);
                out.found = true;
                if (k < dy) t_can_be_nonzero = true;
                break;
            }
        }
    }
    if (out.regularity && !(out.found && t_can_be_nonzero && !is_zero(out.t)))
        throw Error("set-valued multiplier search: the regularity surrogate holds but no "
                    "multiplier with t != 0 exists");

    // Re-verify against the enumerated generators: the Farkas route and the
    // enumeration route must agree on every reported inequality.
    if (out.found) {
        auto pairing = [&](const Vec& g) {
            return dot(out.t, detail::subvec(g, dx, dx + dy)) +
                   dot(out.u, detail::subvec(g, dx + dy, n));
        };
        for (const auto& r : out.directions.rays)
            if (pairing(r) < 0)
                throw Error("set-valued multiplier search: reported pair fails on an "
                            "enumerated ray");
        for (const auto& l : out.directions.lines)
            if (pairing(l) != 0)
                throw Error("set-valued multiplier search: reported pair fails on an "
                            "enumerated line");
        for (const auto& g : inst.cone_y.cone.rays)
            if (dot(out.t, g) < 0)
                throw Error("set-valued multiplier search: t leaves the dual cone of C_Y");
        for (const auto& g : inst.cone_z.cone.rays)
            if (dot(out.u, g) < 0)
                throw Error("set-valued multiplier search: u leaves the dual cone of C_Z");
        if (dot(out.u, inst.zstar) != 0)
            throw Error("set-valued multiplier search: u(z*) is nonzero");
    }
    return out;
}

} // namespace optcert
