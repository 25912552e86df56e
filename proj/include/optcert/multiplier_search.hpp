#pragma once

// The common LP core of every Fritz-John style multiplier search: decide
// whether 0 is a convex combination of points drawn from a family of
// polytopes (one point per set, weights summing to 1 across the family),
// optionally extended by conic contributions from further sets.
//
// Writing the combination vertex-wise makes this a linear feasibility
// problem: alpha_v >= 0 per vertex v, per-set totals become the multipliers,
// and the chosen subgradient of a set is the weighted average of its
// vertices. Among feasible combinations the search minimizes the total of
// set 0 (by convention the objective's set), so degenerate certificates that
// ignore the objective are surfaced rather than hidden.

#include <cstddef>
#include <string>
#include <vector>

#include "optcert/certificate.hpp"
#include "optcert/geometry.hpp"
#include "optcert/lp.hpp"
#include "optcert/rational.hpp"

namespace optcert {

struct VertexComboResult {
    bool feasible = false;
    std::vector<Rational> convex_sums;  // per convex set; these sum to 1
    std::vector<Vec> convex_points;     // weighted average; empty when sum = 0
    std::vector<Rational> conic_sums;   // per conic set, >= 0 (unnormalized)
    std::vector<Vec> conic_points;      // average of the conic combination
    // When infeasible: <separator, v> <= -1 for every vertex v of every
    // convex set and <separator, w> <= 0 for every vertex of every conic set.
    Vec separator;
};

inline VertexComboResult vertex_combination_search(const std::vector<VPolytope>& convex_sets,
                                                   const std::vector<VPolytope>& conic_sets,
                                                   std::size_t tiebreak_set = 0,
                                                   ObjSense tiebreak = ObjSense::Minimize) {
    if (convex_sets.empty()) throw PreconditionError("multiplier search: no convex sets");
    const std::size_t n = convex_sets[0].dim();
    for (const auto& s : convex_sets) require_dim(s.vertices[0], n, "convex set vertex");
    for (const auto& s : conic_sets) require_dim(s.vertices[0], n, "conic set vertex");

    std::size_t num_vars = 0;
    std::vector<std::pair<std::size_t, std::size_t>> convex_span, conic_span;  // [begin,end)
    for (const auto& s : convex_sets) {
        convex_span.emplace_back(num_vars, num_vars + s.vertices.size());
        num_vars += s.vertices.size();
    }
    for (const auto& s : conic_sets) {
        conic_span.emplace_back(num_vars, num_vars + s.vertices.size());
        num_vars += s.vertices.size();
    }

    std::vector<LPRow> rows;
    for (std::size_t r = 0; r < n; ++r) {
        LPRow row;
        row.coeffs = vzero(num_vars);
        std::size_t col = 0;
        for (const auto& s : convex_sets)
            for (const auto& v : s.vertices) row.coeffs[col++] = v[r];
        for (const auto& s : conic_sets)
            for (const auto& w : s.vertices) row.coeffs[col++] = w[r];
        row.rhs = 0;
        row.sense = RowSense::EQ;
        rows.push_back(std::move(row));
    }
    {
        LPRow sum_row;
        sum_row.coeffs = vzero(num_vars);
        for (const auto& [b, e] : convex_span)
            for (std::size_t c = b; c < e; ++c) sum_row.coeffs[c] = 1;
        sum_row.rhs = 1;
        sum_row.sense = RowSense::EQ;
        rows.push_back(std::move(sum_row));
    }

    Vec objective = vzero(num_vars);
    for (std::size_t c = convex_span[tiebreak_set].first; c < convex_span[tiebreak_set].second;
         ++c)
        objective[c] = 1;

    auto lp = solve_lp(num_vars, rows, objective, tiebreak,
                       std::vector<bool>(num_vars, true));
    VertexComboResult out;
    if (lp.status != LPStatus::Optimal) {
        // Farkas u is normalized so <u, rhs> = -1; the rhs is the unit vector
        // on the sum row, so -u restricted to the coordinate rows separates
        // with margin exactly 1.
        out.separator = vzero(n);
        for (std::size_t r = 0; r < n; ++r) out.separator[r] = -lp.farkas[r];
        return out;
    }
    out.feasible = true;
    auto extract = [&](const std::vector<std::pair<std::size_t, std::size_t>>& spans,
                       const std::vector<VPolytope>& sets, std::vector<Rational>& sums,
                       std::vector<Vec>& points) {
        for (std::size_t s = 0; s < sets.size(); ++s) {
            Rational total = 0;
            Vec weighted = vzero(n);
            for (std::size_t c = spans[s].first; c < spans[s].second; ++c) {
                const Rational& a = lp.solution[c];
                total += a;
                weighted = vadd(weighted, vscale(a, sets[s].vertices[c - spans[s].first]));
            }
            sums.push_back(total);
            points.push_back(total == 0 ? Vec{} : vscale(Rational(1) / total, weighted));
        }
    };
    extract(convex_span, convex_sets, out.convex_sums, out.convex_points);
    extract(conic_span, conic_sets, out.conic_sums, out.conic_points);
    return out;
}

// Full Fritz-John search over precomputed subdifferential sets: sets[0] for
// the objective, sets[k] (k >= 1) for the active inequality active[k-1];
// equality sets enter with free-signed multipliers via one LP per sign
// pattern. `overapprox` marks that some participating set only
// over-approximates the true subdifferential, in which case an outright
// failure is reported as inconclusive.
struct FJSearchInput {
    std::size_t dim = 0;
    std::size_t num_ineqs = 0;
    std::vector<VPolytope> sets;
    std::vector<std::size_t> active;
    std::vector<VPolytope> eq_sets;
    bool overapprox = false;
};

inline Certificate fj_multiplier_search(const FJSearchInput& in) {
    if (in.eq_sets.size() > 10)
        throw InputError("multiplier search: refusing sign-pattern enumeration over " +
                         std::to_string(in.eq_sets.size()) + " equality constraints (max 10)");
    const std::size_t m = in.num_ineqs;
    const std::size_t q = in.eq_sets.size();

    Certificate cert;
    cert.normalization =
        "multipliers over the objective and active inequalities sum to 1; ties broken by "
        "minimizing lambda_0";

    Vec first_separator;
    for (std::size_t mask = 0; mask < (std::size_t{1} << q); ++mask) {
        std::vector<int> sign(q, 1);
        std::vector<VPolytope> conic;
        for (std::size_t j = 0; j < q; ++j) {
            if (mask & (std::size_t{1} << j)) sign[j] = -1;
            conic.push_back(scale(Rational(sign[j]), in.eq_sets[j]));
        }
        auto res = vertex_combination_search(in.sets, conic, 0);
        if (!res.feasible) {
            if (mask == 0) first_separator = res.separator;
            continue;
        }
        cert.status = CertStatus::Holds;
        cert.lambda = vzero(m + 1);
        cert.lambda[0] = res.convex_sums[0];
        for (std::size_t k = 0; k < in.active.size(); ++k)
            cert.lambda[in.active[k] + 1] = res.convex_sums[k + 1];
        cert.mu = vzero(q);
        for (std::size_t j = 0; j < q; ++j)
            cert.mu[j] = Rational(sign[j]) * res.conic_sums[j];

        Vec recombined = vzero(in.dim);
        if (res.convex_sums[0] > 0) {
            cert.witnesses.emplace_back(0, res.convex_points[0]);
            recombined = vadd(recombined, vscale(res.convex_sums[0], res.convex_points[0]));
        }
        for (std::size_t k = 0; k < in.active.size(); ++k) {
            if (res.convex_sums[k + 1] == 0) continue;
            cert.witnesses.emplace_back(in.active[k] + 1, res.convex_points[k + 1]);
            recombined =
                vadd(recombined, vscale(res.convex_sums[k + 1], res.convex_points[k + 1]));
        }
        for (std::size_t j = 0; j < q; ++j) {
            if (res.conic_sums[j] == 0) continue;
            // conic_points live in sign*dh_j; report the element of dh_j.
            const Vec xi = vscale(Rational(sign[j]), res.conic_points[j]);
            cert.witnesses.emplace_back(m + 1 + j, xi);
            recombined = vadd(recombined, vscale(cert.mu[j], xi));
        }
        if (!is_zero(recombined))
            throw Error(
                "multiplier search: internal error, certificate does not recombine to zero");
        if (in.overapprox)
            cert.normalization += "; witnesses drawn from over-approximate sets";
        return cert;
    }

    if (in.overapprox) {
        cert.status = CertStatus::Inconclusive;
        cert.normalization +=
            "; no multipliers found, but some sets are over-approximations";
        return cert;
    }
    cert.status = CertStatus::Fails;
    cert.refutation = first_separator;
    if (q > 0)
        cert.normalization +=
            "; refutation separates the all-positive equality sign pattern only";
    return cert;
}

} // namespace optcert
