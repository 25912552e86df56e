#pragma once

// Smooth multiplier certificates and constraint qualifications. The problem
// is reduced to gradients at one point (computed from expressions or supplied
// directly); KKT and Fritz-John multipliers then become exact LP feasibility
// questions, and the qualifications LICQ/MFCQ/Slater/Abadie each get a
// decidable check with machine-verifiable evidence. An audit entry point
// re-checks the textbook implication arrows (LICQ => MFCQ, Slater => MFCQ)
// across a corpus, reporting any counterexample as a bug in this library.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "optcert/certificate.hpp"
#include "optcert/convex.hpp"
#include "optcert/errors.hpp"
#include "optcert/expr.hpp"
#include "optcert/geometry.hpp"
#include "optcert/lp.hpp"
#include "optcert/multiplier_search.hpp"
#include "optcert/rational.hpp"

namespace optcert {

enum class GradientSource { FromExpr, UserSupplied };

// A smooth program collapsed to first-order data at one feasible point.
// Inactive inequalities are dropped (complementary slackness by
// construction); `active` keeps their original indices for reporting.
struct SmoothProblemAtPoint {
    std::size_t dim = 0;
    Vec xstar;
    Vec grad_f;
    std::size_t num_ineqs = 0;
    std::vector<std::size_t> active;
    std::vector<Vec> grad_g_active;  // parallel to `active`
    std::vector<Vec> grad_h;
    GradientSource source = GradientSource::UserSupplied;
};

// Evaluates feasibility and the active set exactly (rational track) or with
// the float tolerance (poisoned track), then differentiates each participating
// function. Gradients must come out exact-rational.
inline SmoothProblemAtPoint smooth_problem_at_point(const Program& prob, const Vec& xstar) {
    require_dim(xstar, prob.dim, "x*");
    SmoothProblemAtPoint p;
    p.dim = prob.dim;
    p.xstar = xstar;
    p.num_ineqs = prob.ineqs.size();
    p.source = GradientSource::FromExpr;
    p.grad_f = exact_gradient(prob.objective, xstar);
    for (std::size_t i = 0; i < prob.ineqs.size(); ++i) {
        const int s = sign_of(eval(prob.ineqs[i], xstar));
        if (s > 0) throw PreconditionError("x* violates inequality " + std::to_string(i));
        if (s == 0) {
            p.active.push_back(i);
            p.grad_g_active.push_back(exact_gradient(prob.ineqs[i], xstar));
        }
    }
    for (std::size_t j = 0; j < prob.eqs.size(); ++j) {
        if (sign_of(eval(prob.eqs[j], xstar)) != 0)
            throw PreconditionError("x* violates equality " + std::to_string(j));
        p.grad_h.push_back(exact_gradient(prob.eqs[j], xstar));
    }
    return p;
}

enum class MultiplierMode { Kkt, FritzJohn };

// Stationarity multipliers at the point. Fritz-John mode normalizes
// lambda_0 + sum of active lambda_i = 1 (the objective may drop out);
// KKT mode pins lambda_0 = 1. On failure the refutation y is a strict
// descent direction inside the linearizing cone:
//   <grad f, y> < 0,  <grad g_i, y> <= 0,  <grad h_j, y> = 0.
inline Certificate kkt_fj_smooth(const SmoothProblemAtPoint& p, MultiplierMode mode) {
    const std::size_t m = p.num_ineqs;
    const std::size_t q = p.grad_h.size();
    const std::size_t n = p.dim;
    require_dim(p.grad_f, n, "objective gradient");
    for (const auto& g : p.grad_g_active) require_dim(g, n, "inequality gradient");
    for (const auto& h : p.grad_h) require_dim(h, n, "equality gradient");

    Certificate cert;
    if (mode == MultiplierMode::FritzJohn) {
        std::vector<VPolytope> sets;
        sets.push_back(singleton(p.grad_f));
        for (const auto& g : p.grad_g_active) sets.push_back(singleton(g));
        std::vector<VPolytope> conic;
        for (const auto& h : p.grad_h) {
            conic.push_back(singleton(h));
            conic.push_back(singleton(vneg(h)));
        }
        auto res = vertex_combination_search(sets, conic, 0);
        cert.normalization =
            "multipliers over the objective and active inequalities sum to 1; ties broken by "
            "minimizing lambda_0";
        if (!res.feasible) {
            cert.status = CertStatus::Fails;
            cert.refutation = res.separator;
            return cert;
        }
        cert.status = CertStatus::Holds;
        cert.lambda = vzero(m + 1);
        cert.lambda[0] = res.convex_sums[0];
        for (std::size_t k = 0; k < p.active.size(); ++k)
            cert.lambda[p.active[k] + 1] = res.convex_sums[k + 1];
        cert.mu = vzero(q);
        for (std::size_t j = 0; j < q; ++j)
            cert.mu[j] = res.conic_sums[2 * j] - res.conic_sums[2 * j + 1];
        if (cert.lambda[0] != 0) cert.witnesses.emplace_back(0, p.grad_f);
        for (std::size_t k = 0; k < p.active.size(); ++k)
            if (cert.lambda[p.active[k] + 1] != 0)
                cert.witnesses.emplace_back(p.active[k] + 1, p.grad_g_active[k]);
        for (std::size_t j = 0; j < q; ++j)
            if (cert.mu[j] != 0) cert.witnesses.emplace_back(m + 1 + j, p.grad_h[j]);
        return cert;
    }

    // KKT: grad f + sum lambda_i grad g_i + sum mu_j grad h_j = 0 with
    // lambda >= 0 and mu split into nonnegative halves.
    const std::size_t num_vars = p.active.size() + 2 * q;
    std::vector<LPRow> rows;
    for (std::size_t r = 0; r < n; ++r) {
        LPRow row;
        row.coeffs = vzero(num_vars);
        for (std::size_t k = 0; k < p.active.size(); ++k) row.coeffs[k] = p.grad_g_active[k][r];
        for (std::size_t j = 0; j < q; ++j) {
            row.coeffs[p.active.size() + 2 * j] = p.grad_h[j][r];
            row.coeffs[p.active.size() + 2 * j + 1] = -p.grad_h[j][r];
        }
        row.rhs = -p.grad_f[r];
        row.sense = RowSense::EQ;
        rows.push_back(std::move(row));
    }
    Vec total(num_vars, Rational(1));
    auto lp = solve_lp(static_cast<int>(num_vars), rows, total, ObjSense::Minimize,
                       std::vector<bool>(num_vars, true));
    cert.normalization =
        "lambda_0 fixed to 1; ties broken by minimizing the total multiplier mass";
    if (lp.status != LPStatus::Optimal) {
        cert.status = CertStatus::Fails;
        Vec y = vzero(n);
        for (std::size_t r = 0; r < n; ++r) y[r] = -lp.farkas[r];
        cert.refutation = std::move(y);
        return cert;
    }
    cert.status = CertStatus::Holds;
    cert.lambda = vzero(m + 1);
    cert.lambda[0] = 1;
    for (std::size_t k = 0; k < p.active.size(); ++k)
        cert.lambda[p.active[k] + 1] = lp.solution[k];
    cert.mu = vzero(q);
    for (std::size_t j = 0; j < q; ++j)
        cert.mu[j] = lp.solution[p.active.size() + 2 * j] - lp.solution[p.active.size() + 2 * j + 1];
    cert.witnesses.emplace_back(0, p.grad_f);
    for (std::size_t k = 0; k < p.active.size(); ++k)
        if (cert.lambda[p.active[k] + 1] != 0)
            cert.witnesses.emplace_back(p.active[k] + 1, p.grad_g_active[k]);
    for (std::size_t j = 0; j < q; ++j)
        if (cert.mu[j] != 0) cert.witnesses.emplace_back(m + 1 + j, p.grad_h[j]);
    return cert;
}

// The cone of directions allowed to first order by the active constraints:
// { y : <grad g_i, y> <= 0 for active i, <grad h_j, y> = 0 }.
inline HPolyhedron linearizing_cone(const SmoothProblemAtPoint& p) {
    HPolyhedron c;
    c.dim = p.dim;
    for (const auto& g : p.grad_g_active) c.ineqs.push_back({g, Rational(0)});
    for (const auto& h : p.grad_h) c.eqs.push_back({h, Rational(0)});
    return c;
}

// --- constraint qualifications ----------------------------------------------

enum class CqKind { Licq, Mfcq, Slater, AbadiePolyhedral };

inline const char* to_string(CqKind k) {
    switch (k) {
        case CqKind::Licq: return "licq";
        case CqKind::Mfcq: return "mfcq";
        case CqKind::Slater: return "slater";
        case CqKind::AbadiePolyhedral: return "abadie-polyhedral";
    }
    return "?";
}

struct CqResult {
    CqKind which = CqKind::Licq;
    bool holds = false;
    std::string evidence;
    std::optional<Vec> witness;  // mfcq direction / slater point
    Rational slack = 0;          // mfcq: optimal strictness margin
};

inline CqResult cq_licq(const SmoothProblemAtPoint& p) {
    Mat stacked;
    for (const auto& g : p.grad_g_active) stacked.push_back(g);
    for (const auto& h : p.grad_h) stacked.push_back(h);
    CqResult r;
    r.which = CqKind::Licq;
    const std::size_t rank = stacked.empty() ? 0 : matrix_rank(stacked);
    r.holds = rank == stacked.size();
    r.evidence = "stacked active-inequality and equality gradients: rank " + std::to_string(rank) +
                 " of " + std::to_string(stacked.size()) + " rows";
    return r;
}

inline CqResult cq_mfcq(const SmoothProblemAtPoint& p) {
    CqResult r;
    r.which = CqKind::Mfcq;
    {
        Mat eqs;
        for (const auto& h : p.grad_h) eqs.push_back(h);
        if (!eqs.empty() && static_cast<std::size_t>(matrix_rank(eqs)) != eqs.size()) {
            r.holds = false;
            r.evidence = "equality gradients are linearly dependent";
            return r;
        }
    }
    // Maximize t subject to <grad g_i, y> + t <= 0, <grad h_j, y> = 0,
    // |y_k| <= 1, t <= 1. MFCQ holds iff the optimum is positive.
    const std::size_t n = p.dim;
    const std::size_t num_vars = n + 1;
    std::vector<LPRow> rows;
    for (const auto& g : p.grad_g_active) {
        LPRow row;
        row.coeffs = g;
        row.coeffs.push_back(1);
        row.rhs = 0;
        row.sense = RowSense::LE;
        rows.push_back(std::move(row));
    }
    for (const auto& h : p.grad_h) {
        LPRow row;
        row.coeffs = h;
        row.coeffs.push_back(0);
        row.rhs = 0;
        row.sense = RowSense::EQ;
        rows.push_back(std::move(row));
    }
    for (std::size_t k = 0; k <= n; ++k) {  // |y_k| <= 1 and t <= 1
        LPRow up;
        up.coeffs = vzero(num_vars);
        up.coeffs[k] = 1;
        up.rhs = 1;
        up.sense = RowSense::LE;
        rows.push_back(std::move(up));
        if (k < n) {
            LPRow down;
            down.coeffs = vzero(num_vars);
            down.coeffs[k] = -1;
            down.rhs = 1;
            down.sense = RowSense::LE;
            rows.push_back(std::move(down));
        }
    }
    Vec objective = vzero(num_vars);
    objective[n] = 1;
    auto lp = solve_lp(static_cast<int>(num_vars), rows, objective, ObjSense::Maximize,
                       std::vector<bool>(num_vars, false));
    if (lp.status != LPStatus::Optimal)
        throw Error("mfcq slack LP: expected an optimum (the box bounds it)");
    r.slack = lp.value;
    r.holds = r.slack > 0;
    Vec y(lp.solution.begin(), lp.solution.begin() + static_cast<std::ptrdiff_t>(n));
    r.witness = std::move(y);
    r.evidence = r.holds ? "strict descent direction for every active inequality, slack " +
                               format_rational(r.slack)
                         : "no direction makes all active inequalities strictly decrease";
    return r;
}

// Structural Slater check: every inequality must pass the convex-fragment
// recognizer, equalities must be affine, and the supplied point must satisfy
// g_i(x0) < 0 and h_j(x0) = 0 exactly.
inline CqResult cq_slater(const Program& prob, const Vec& x0) {
    require_dim(x0, prob.dim, "slater point");
    CqResult r;
    r.which = CqKind::Slater;
    r.witness = x0;
    for (std::size_t i = 0; i < prob.ineqs.size(); ++i) {
        try {
            (void)convex_subdifferential(prob.ineqs[i], x0);
        } catch (const InputError&) {
            throw InputError("slater: inequality " + std::to_string(i) +
                             " is not certified convex by the structural fragment");
        }
    }
    for (std::size_t j = 0; j < prob.eqs.size(); ++j)
        if (!as_affine(prob.eqs[j], prob.dim))
            throw InputError("slater: equality " + std::to_string(j) + " is not affine");
    for (std::size_t i = 0; i < prob.ineqs.size(); ++i) {
        if (sign_of(eval(prob.ineqs[i], x0)) >= 0) {
            r.holds = false;
            r.evidence = "inequality " + std::to_string(i) + " is not strictly negative at x0";
            return r;
        }
    }
    for (std::size_t j = 0; j < prob.eqs.size(); ++j) {
        if (sign_of(eval(prob.eqs[j], x0)) != 0) {
            r.holds = false;
            r.evidence = "equality " + std::to_string(j) + " is nonzero at x0";
            return r;
        }
    }
    r.holds = true;
    r.evidence =
        "inequalities certified convex structurally, equalities affine, x0 strictly feasible";
    return r;
}

// For purely affine constraints the tangent cone at any feasible point is cut
// out by exactly the active rows, so it coincides with the linearizing cone;
// the check recomputes both sides and confirms they agree row by row.
inline CqResult cq_abadie_polyhedral(const Program& prob, const Vec& xstar) {
    require_dim(xstar, prob.dim, "x*");
    HPolyhedron s;
    s.dim = prob.dim;
    std::vector<Vec> ineq_grads;
    for (std::size_t i = 0; i < prob.ineqs.size(); ++i) {
        auto aff = as_affine(prob.ineqs[i], prob.dim);
        if (!aff)
            throw InputError("abadie: inequality " + std::to_string(i) +
                             " is not affine; undecidable here, use the tangency sampling "
                             "falsifier instead");
        s.ineqs.push_back({aff->first, -aff->second});
        ineq_grads.push_back(aff->first);
    }
    for (std::size_t j = 0; j < prob.eqs.size(); ++j) {
        auto aff = as_affine(prob.eqs[j], prob.dim);
        if (!aff)
            throw InputError("abadie: equality " + std::to_string(j) +
                             " is not affine; undecidable here, use the tangency sampling "
                             "falsifier instead");
        s.eqs.push_back({aff->first, -aff->second});
    }
    auto tn = tangent_normal_cones(s, xstar);

    // Cross-validate the H-form active set against expression evaluation.
    std::vector<std::size_t> active_by_eval;
    for (std::size_t i = 0; i < prob.ineqs.size(); ++i)
        if (sign_of(eval(prob.ineqs[i], xstar)) == 0) active_by_eval.push_back(i);
    if (active_by_eval != tn.active_ineqs)
        throw Error("abadie: internal error, active sets from rows and expressions disagree");

    CqResult r;
    r.which = CqKind::AbadiePolyhedral;
    r.holds = true;
    r.evidence = "polyhedral constraints: tangent cone and linearizing cone are cut out by the "
                 "same " +
                 std::to_string(tn.tangent.ineqs.size()) + " active rows and " +
                 std::to_string(tn.tangent.eqs.size()) + " equality rows";
    return r;
}

struct CqRequest {
    CqKind which = CqKind::Licq;
    std::optional<SmoothProblemAtPoint> at;  // licq / mfcq
    std::optional<Program> program;          // slater / abadie
    std::optional<Vec> point;                // slater x0 / abadie x*
};

inline CqResult cq_check(const CqRequest& req) {
    switch (req.which) {
        case CqKind::Licq:
        case CqKind::Mfcq:
            if (!req.at)
                throw InputError("licq/mfcq need gradients at the point (SmoothProblemAtPoint)");
            return req.which == CqKind::Licq ? cq_licq(*req.at) : cq_mfcq(*req.at);
        case CqKind::Slater:
            if (!req.program) throw InputError("slater: program required");
            if (!req.point) throw InputError("slater: witness point required");
            return cq_slater(*req.program, *req.point);
        case CqKind::AbadiePolyhedral:
            if (!req.program || !req.point)
                throw InputError("abadie: program and feasible point required");
            return cq_abadie_polyhedral(*req.program, *req.point);
    }
    throw InputError("unknown constraint qualification");
}

// --- implication audit --------------------------------------------------------

struct SmoothCqInstance {
    SmoothProblemAtPoint at;
    std::optional<Program> program;  // enables the Slater leg
    std::optional<Vec> slater_point;
};

struct CqAuditReport {
    std::size_t instances = 0;
    std::size_t licq_holds = 0;
    std::size_t mfcq_holds = 0;
    std::size_t slater_checked = 0;
    std::size_t slater_holds = 0;
    // Slater instances whose equality gradients are dependent: MFCQ as
    // defined cannot hold there, so the arrow is not asserted.
    std::size_t slater_skipped_dependent_eqs = 0;
    // Any entry here is a refuted theorem arrow, i.e. a bug in this library.
    std::vector<std::string> violations;
    std::string note;
};

inline CqAuditReport cq_implication_audit(const std::vector<SmoothCqInstance>& corpus) {
    CqAuditReport rep;
    rep.note = "abadie implies guignard definitionally (C subset T subset co T); recorded, not "
               "recomputed";
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& inst = corpus[i];
        ++rep.instances;
        const bool licq = cq_licq(inst.at).holds;
        const auto mfcq = cq_mfcq(inst.at);
        if (licq) ++rep.licq_holds;
        if (mfcq.holds) ++rep.mfcq_holds;
        if (licq && !mfcq.holds)
            rep.violations.push_back("instance " + std::to_string(i) +
                                     ": licq holds but mfcq fails");
        if (inst.program && inst.slater_point) {
            ++rep.slater_checked;
            if (cq_slater(*inst.program, *inst.slater_point).holds) {
                ++rep.slater_holds;
                if (!mfcq.holds) {
                    if (mfcq.evidence == "equality gradients are linearly dependent")
                        ++rep.slater_skipped_dependent_eqs;
                    else
                        rep.violations.push_back("instance " + std::to_string(i) +
                                                 ": slater holds but mfcq fails");
                }
            }
        }
    }
    return rep;
}

} // namespace optcert
