#pragma once

// Vertex-form polytopes and half-space-form polyhedra/cones: support
// functions, Minkowski algebra, inclusion, polar cones, tangent/normal
// cones, and a numeric tangency probe backed by exact projection.
//
// Vertex lists may contain redundant (non-extreme) points; every query is
// LP-based, so redundancy is semantically invisible.

#include <algorithm>
#include <optional>
#include <vector>

#include "optcert/lp.hpp"
#include "optcert/rational.hpp"

namespace optcert {

struct VPolytope {
    std::vector<Vec> vertices;

    VPolytope() = default;
    explicit VPolytope(std::vector<Vec> verts) : vertices(std::move(verts)) {
        if (vertices.empty()) throw InputError("VPolytope: vertex list must be nonempty");
        for (const auto& v : vertices)
            if (v.size() != vertices[0].size())
                throw InputError("VPolytope: inconsistent vertex dimensions");
    }

    std::size_t dim() const { return vertices[0].size(); }
};

struct HRow {
    Vec normal;
    Rational rhs;
};

struct HPolyhedron {
    std::size_t dim = 0;
    std::vector<HRow> ineqs;  // <normal, x> <= rhs
    std::vector<HRow> eqs;    // <normal, x> =  rhs

    void validate() const {
        for (const auto& r : ineqs) require_dim(r.normal, dim, "HPolyhedron inequality row");
        for (const auto& r : eqs) require_dim(r.normal, dim, "HPolyhedron equality row");
    }

    // Exact membership; returns the description of the first violated row,
    // or nullopt when x satisfies everything.
    std::optional<std::string> violated_row(const Vec& x) const {
        require_dim(x, dim, "HPolyhedron point");
        for (std::size_t i = 0; i < ineqs.size(); ++i)
            if (!(dot(ineqs[i].normal, x) <= ineqs[i].rhs))
                return "inequality row " + std::to_string(i) + ": <" + format_vec(ineqs[i].normal) +
                       ", x> <= " + format_rational(ineqs[i].rhs);
        for (std::size_t j = 0; j < eqs.size(); ++j)
            if (dot(eqs[j].normal, x) != eqs[j].rhs)
                return "equality row " + std::to_string(j) + ": <" + format_vec(eqs[j].normal) +
                       ", x> = " + format_rational(eqs[j].rhs);
        return std::nullopt;
    }

    bool contains(const Vec& x) const { return !violated_row(x).has_value(); }
};

struct FGCone {
    std::size_t dim = 0;
    std::vector<Vec> rays;
    std::vector<Vec> lines;  // full lines: both directions belong to the cone
};

// --- polytope operations ----------------------------------------------------

inline Rational support_value(const VPolytope& p, const Vec& direction) {
    require_dim(direction, p.dim(), "support direction");
    Rational best = dot(p.vertices[0], direction);
    for (std::size_t i = 1; i < p.vertices.size(); ++i)
        best = std::max(best, dot(p.vertices[i], direction));
    return best;
}

namespace detail {
inline void dedupe(std::vector<Vec>& vs) {
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
}
} // namespace detail

inline VPolytope minkowski_sum(const VPolytope& a, const VPolytope& b) {
    if (a.dim() != b.dim()) throw InputError("minkowski_sum: dimension mismatch");
    std::vector<Vec> sums;
    sums.reserve(a.vertices.size() * b.vertices.size());
    for (const auto& va : a.vertices)
        for (const auto& vb : b.vertices) sums.push_back(vadd(va, vb));
    detail::dedupe(sums);
    return VPolytope(std::move(sums));
}

inline VPolytope scale(const Rational& c, const VPolytope& p) {
    std::vector<Vec> vs;
    vs.reserve(p.vertices.size());
    for (const auto& v : p.vertices) vs.push_back(vscale(c, v));
    detail::dedupe(vs);
    return VPolytope(std::move(vs));
}

inline VPolytope hull_union(const std::vector<VPolytope>& parts) {
    if (parts.empty()) throw InputError("hull_union: no polytopes given");
    std::vector<Vec> vs;
    for (const auto& p : parts) {
        if (p.dim() != parts[0].dim()) throw InputError("hull_union: dimension mismatch");
        vs.insert(vs.end(), p.vertices.begin(), p.vertices.end());
    }
    detail::dedupe(vs);
    return VPolytope(std::move(vs));
}

inline VPolytope singleton(Vec v) { return VPolytope({std::move(v)}); }

struct ContainsResult {
    bool contained = true;
    Vec offending_vertex;  // vertex of `inner` outside `outer`
    Vec separator;         // <separator, outer vertex> <= separator_rhs,
    Rational separator_rhs;  // <separator, offending_vertex> = separator_rhs + 1
};

inline ContainsResult polytope_contains(const VPolytope& outer, const VPolytope& inner) {
    if (outer.dim() != inner.dim()) throw InputError("polytope_contains: dimension mismatch");
    for (const auto& v : inner.vertices) {
        auto hm = hull_membership(v, outer.vertices, HullMode::Convex);
        if (!hm.member) {
            ContainsResult r;
            r.contained = false;
            r.offending_vertex = v;
            r.separator = hm.separator;
            r.separator_rhs = hm.separator_rhs;
            return r;
        }
    }
    return ContainsResult{};
}

inline bool polytope_set_equal(const VPolytope& a, const VPolytope& b) {
    return polytope_contains(a, b).contained && polytope_contains(b, a).contained;
}

// --- cones -------------------------------------------------------------

// Polar in half-space form: one homogeneous <= row per ray, one homogeneous
// = row per lineality generator.
inline HPolyhedron polar_cone(const FGCone& c) {
    HPolyhedron h;
    h.dim = c.dim;
    for (const auto& a : c.rays) {
        require_dim(a, c.dim, "cone ray");
        h.ineqs.push_back({a, Rational(0)});
    }
    for (const auto& b : c.lines) {
        require_dim(b, c.dim, "cone line");
        h.eqs.push_back({b, Rational(0)});
    }
    return h;
}

// Membership in a finitely generated cone (rays plus +-lines). The cone
// with no generators is {0}.
inline bool cone_member(const FGCone& c, const Vec& v) {
    require_dim(v, c.dim, "cone membership point");
    std::vector<Vec> gens = c.rays;
    for (const auto& l : c.lines) {
        gens.push_back(l);
        gens.push_back(vneg(l));
    }
    if (gens.empty()) return is_zero(v);
    if (is_zero(v)) return true;
    return hull_membership(v, gens, HullMode::Conic).member;
}

struct TangentNormal {
    HPolyhedron tangent;
    FGCone normal;
    std::vector<std::size_t> active_ineqs;
};

// Tangent and normal cones of a polyhedron at a feasible point: the tangent
// cone is cut out by the active rows, the normal cone is generated by the
// active inequality normals plus +-equality normals, and the two are polar
// to each other.
inline TangentNormal tangent_normal_cones(const HPolyhedron& s, const Vec& x) {
    s.validate();
    if (auto bad = s.violated_row(x))
        throw PreconditionError("tangent_normal_cones: point is infeasible, violates " + *bad);
    TangentNormal tn;
    tn.tangent.dim = s.dim;
    tn.normal.dim = s.dim;
    for (std::size_t i = 0; i < s.ineqs.size(); ++i) {
        if (dot(s.ineqs[i].normal, x) == s.ineqs[i].rhs) {
            tn.active_ineqs.push_back(i);
            tn.tangent.ineqs.push_back({s.ineqs[i].normal, Rational(0)});
            tn.normal.rays.push_back(s.ineqs[i].normal);
        }
    }
    for (const auto& e : s.eqs) {
        tn.tangent.eqs.push_back({e.normal, Rational(0)});
        tn.normal.lines.push_back(e.normal);
    }
    return tn;
}

// --- exact projection / tangency probe --------------------------------------

namespace detail {

// Solves a square rational system by Gaussian elimination; nullopt when
// singular.
inline std::optional<Vec> solve_square(Mat a, Vec b) {
    const std::size_t n = a.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && a[p][c] == 0) ++p;
        if (p == n) return std::nullopt;
        std::swap(a[p], a[c]);
        std::swap(b[p], b[c]);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c || a[i][c] == 0) continue;
            const Rational f = a[i][c] / a[c][c];
            for (std::size_t j = c; j < n; ++j) a[i][j] -= f * a[c][j];
            b[i] -= f * b[c];
        }
    }
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

// Exact squared distance from q to conv(vertices) by enumerating candidate
// faces: every affinely independent vertex subset of size <= dim+1. The
// nearest point lies in the relative interior of some face; Caratheodory
// plus the orthogonality condition make some such subset reproduce it.
inline Rational dist_sq_to_hull(const std::vector<Vec>& vertices, const Vec& q) {
    std::vector<Vec> vs = vertices;
    dedupe(vs);
    const std::size_t n = q.size();
    const std::size_t kmax = std::min(vs.size(), n + 1);
    std::optional<Rational> best;
    std::vector<std::size_t> idx;
    auto consider = [&](const std::vector<std::size_t>& sel) {
        const Vec& q0 = vs[sel[0]];
        const std::size_t r = sel.size() - 1;
        Vec diff = vsub(q, q0);
        if (r == 0) {
            const Rational d2 = norm_sq(diff);
            if (!best || d2 < *best) best = d2;
            return;
        }
        std::vector<Vec> span(r);
        for (std::size_t i = 0; i < r; ++i) span[i] = vsub(vs[sel[i + 1]], q0);
        Mat gram(r, Vec(r));
        Vec rhs(r);
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t k = 0; k < r; ++k) gram[i][k] = dot(span[i], span[k]);
            rhs[i] = dot(span[i], diff);
        }
        auto t = solve_square(gram, rhs);
        if (!t) return;  // affinely dependent subset
        Rational t_sum = 0;
        for (const auto& ti : *t) t_sum += ti;
        if (t_sum > 1) return;  // barycentric weight of q0 would go negative
        for (const auto& ti : *t)
            if (ti < 0) return;
        Vec proj = q0;
        for (std::size_t i = 0; i < r; ++i) proj = vadd(proj, vscale((*t)[i], span[i]));
        const Rational d2 = norm_sq(vsub(q, proj));
        if (!best || d2 < *best) best = d2;
    };
    // Enumerate subsets of sizes 1..kmax (kmax <= 4 at supported dims).
    std::vector<std::size_t> sel;
    auto rec = [&](auto&& self, std::size_t start, std::size_t want) -> void {
        if (sel.size() == want) {
            consider(sel);
            return;
        }
        for (std::size_t i = start; i + (want - sel.size()) <= vs.size(); ++i) {
            sel.push_back(i);
            self(self, i + 1, want);
            sel.pop_back();
        }
    };
    for (std::size_t size = 1; size <= kmax; ++size) rec(rec, 0, size);
    return *best;
}

} // namespace detail

enum class TangentVerdict { Tangent, NotTangent, Inconclusive };

struct TangentProbe {
    TangentVerdict verdict = TangentVerdict::Inconclusive;
    std::vector<double> ratios;  // d(x + t v) / t along t = 2^-k, k = 4..24
};

// Estimates liminf_{t -> 0+} d_P(x + t v) / t along t = 2^-k, k = 4..24,
// with the distance computed exactly (face enumeration; supported up to
// dimension 3). Tangent iff some ratio drops below 1e-9 — the comparison
// d^2 < (1e-9 t)^2 is exact, so the verdict carries no rounding.
inline TangentProbe tangent_via_distance_oracle(const VPolytope& p, const Vec& x, const Vec& v) {
    require_dim(x, p.dim(), "probe base point");
    require_dim(v, p.dim(), "probe direction");
    if (!hull_membership(x, p.vertices, HullMode::Convex).member)
        throw PreconditionError("tangent_via_distance_oracle: base point is not in the polytope");
    TangentProbe out;
    if (is_zero(v)) {
        out.verdict = TangentVerdict::Tangent;
        out.ratios.assign(21, 0.0);
        return out;
    }
    if (p.dim() > 3) {
        out.verdict = TangentVerdict::Inconclusive;
        return out;
    }
    const Rational threshold_sq = Rational(1, Int("1000000000000000000"));  // (1e-9)^2
    bool hit = false;
    for (int k = 4; k <= 24; ++k) {
        const Rational t(Int(1), Int(1) << k);
        const Rational d2 = detail::dist_sq_to_hull(p.vertices, vadd(x, vscale(t, v)));
        out.ratios.push_back(std::sqrt(static_cast<double>(d2)) / static_cast<double>(t));
        if (d2 < threshold_sq * t * t) hit = true;
    }
    out.verdict = hit ? TangentVerdict::Tangent : TangentVerdict::NotTangent;
    return out;
}

} // namespace optcert
