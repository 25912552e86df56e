// Acceptance gate: twelve end-to-end criteria, one pass/fail line each.
// Exit status is nonzero if any criterion fails. Tolerances and time
// budgets are pinned here; everything compared exactly is compared as
// rationals, and every numeric bound names its tolerance.
//
// Usage: acceptance [corpus-dir]   (default: "corpus")

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "optcert/checks.hpp"

using namespace optcert;

namespace {

constexpr double kDirectionalTol = 1e-6;  // numeric vs exact directional derivatives
constexpr double kFoBoundTol = 1e-4;      // numeric generalized quotient vs support value
constexpr double kFloatTol = 1e-9;        // float-track comparison tolerance (default)
constexpr double kFastBudgetMs = 1000.0;  // criteria 1-3
constexpr double kSlowBudgetMs = 30000.0; // criterion 4

std::string g_dir = "corpus";

#define ACCEPT(cond, what)                                                       \
    do {                                                                         \
        if (!(cond)) throw std::runtime_error(std::string("assert: ") + (what)); \
    } while (0)

ParsedFile load(const std::string& file) { return parse_problem_file(g_dir + "/" + file); }

json single_record(const ParsedFile& f, const std::string& check) {
    const CheckReport rep = run_check(f, check);
    ACCEPT(rep.doc["checks"][0]["status"] != "error",
           "check '" + check + "' errored: " + rep.doc["checks"][0].value("message", ""));
    return rep.doc["checks"][0];
}

// Re-verify a Farkas refutation of the Fritz John system at a point whose
// objective/equality gradients span independently: the separator must push
// the objective gradient below -1 and stay nonpositive on the (all-positive
// sign pattern of the) equality gradients.
void check_farkas_separates(const SmoothProblemAtPoint& at, const Vec& separator) {
    ACCEPT(dot(separator, at.grad_f) <= Rational(-1),
           "separator does not push the objective gradient below -1");
    for (const auto& g : at.grad_g_active)
        ACCEPT(dot(separator, g) <= Rational(-1),
               "separator does not push an active inequality gradient below -1");
    for (const auto& h : at.grad_h)
        ACCEPT(dot(separator, h) <= Rational(0),
               "separator is positive on an equality gradient");
}

Vec parse_report_vec(const json& arr) {
    Vec out;
    for (const auto& s : arr) {
        const std::string t = s.get<std::string>();
        const std::size_t slash = t.find('/');
        if (slash == std::string::npos)
            out.push_back(Rational(Int(t)));
        else
            out.push_back(Rational(Int(t.substr(0, slash))) / Rational(Int(t.substr(slash + 1))));
    }
    return out;
}

// The pieced-equality criteria share their shape: the multiplier rule must
// fail with a re-verifiable refutation, the first-order data must match the
// classical solution exactly, and the probe must certify differentiability
// at the point next to a discontinuity witness in every dyadic ball.
void check_junction_instance(const std::string& file, const Vec& grad_f, const Vec& grad_h) {
    const ParsedFile f = load(file);
    const json rec = single_record(f, "fj-smooth");
    ACCEPT(rec["status"] == "fails", "fj-smooth did not fail");
    ACCEPT(rec.contains("refutation"), "no refutation embedded");

    const SmoothProblemAtPoint at = checkdetail::smooth_at(f);
    ACCEPT(at.grad_f == grad_f, "objective gradient is not the classical one");
    ACCEPT(at.grad_h.size() == 1 && at.grad_h[0] == grad_h,
           "equality gradient is not the classical one");
    ACCEPT(matrix_rank(Mat{at.grad_f, at.grad_h[0]}) == 2,
           "gradients are not independent, failure would not be forced");
    check_farkas_separates(at, parse_report_vec(rec["refutation"]));

    ACCEPT(rec["regularity_probe"].size() == 2, "expected probes for objective and equality");
    const json probe = rec["regularity_probe"][1]["report"];
    ACCEPT(probe["frechet_ok"] == true, "equality not certified differentiable at the point");
    ACCEPT(probe["continuous_at_x"] == true, "equality not continuous at the point");
    ACCEPT(probe["discontinuity_in_every_ball"] == true,
           "no discontinuity witness in some ball");
    std::set<int> ks;
    for (const auto& w : probe["witnesses"]) {
        const int k = w["scale_k"].get<int>();
        ks.insert(k);
        ACCEPT(std::abs(w["jump"].get<double>()) > 0, "witness without a jump");
        ACCEPT(sup_norm(parse_report_vec(w["point"])) <= Rational(1, Int(1) << k),
               "witness point outside its dyadic ball");
    }
    for (int k = 2; k <= 20; ++k)
        ACCEPT(ks.count(k) == 1, "no witness at radius 2^-" + std::to_string(k));
    ACCEPT(rec["float_tolerance"].get<double>() == kFloatTol,
           "float tolerance is not the pinned default");
}

SuiteResult run_corpus_suite(const std::string& file, const std::string& expect_suite) {
    const ParsedFile f = load(file);
    ACCEPT(f.kind == FileKind::Suite, "not a suite instance");
    ACCEPT(f.suite == expect_suite, "instance pins a different suite");
    const SuiteResult res = run_suite(f.suite, f.seed);
    std::string detail;
    for (const auto& msg : res.failures) detail += "\n    " + msg;
    ACCEPT(res.passed, "suite " + res.suite + " failed" + detail);
    return res;
}

struct Outcome {
    int id;
    bool pass;
    std::string what;
    std::string note;
    double ms;
};

} // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_dir = argv[1];
    std::vector<Outcome> results;

    const auto criterion = [&](int id, const std::string& what, double budget_ms,
                               const std::function<std::string()>& body) {
        Outcome o;
        o.id = id;
        o.what = what;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o.note = body();
            o.pass = true;
        } catch (const std::exception& ex) {
            o.pass = false;
            o.note = ex.what();
        }
        o.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                   .count();
        if (o.pass && budget_ms > 0 && o.ms > budget_ms) {
            o.pass = false;
            o.note = "time budget exceeded: " + std::to_string(o.ms) + " ms > " +
                     std::to_string(budget_ms) + " ms";
        }
        results.push_back(o);
    };

    criterion(1, "pieced equality 1: multiplier rule fails, probe certifies the pathology",
              kFastBudgetMs, [&] {
                  check_junction_instance("junction-no-multiplier-1.json",
                                          Vec{Rational(1), Rational(0)},
                                          Vec{Rational(0), Rational(1)});
                  return "gradients (1,0)/(0,1), Farkas refutation re-verified, "
                         "witnesses at all radii 2^-2..2^-20";
              });

    criterion(2, "pieced equality 2: same shape through the float-tracked exponential",
              kFastBudgetMs, [&] {
                  ACCEPT(float_tolerance() == kFloatTol, "float tolerance not 1e-9");
                  check_junction_instance("junction-no-multiplier-2.json",
                                          Vec{Rational(0), Rational(1)},
                                          Vec{Rational(1), Rational(0)});
                  return "gradients (0,1)/(1,0), exponential pieces probed at tolerance 1e-9";
              });

    criterion(3, "smooth contrast instance: the corrected hypothesis restores multipliers",
              kFastBudgetMs, [&] {
                  const ParsedFile f = load("corrected-hypothesis-contrast.json");
                  const SmoothProblemAtPoint at = checkdetail::smooth_at(f);
                  for (const MultiplierMode mode :
                       {MultiplierMode::FritzJohn, MultiplierMode::Kkt}) {
                      const Certificate cert = kkt_fj_smooth(at, mode);
                      ACCEPT(cert.status == CertStatus::Holds, "certificate does not hold");
                      ACCEPT(cert.lambda == Vec{Rational(1)}, "lambda_0 != 1");
                      ACCEPT(cert.mu == Vec{Rational(0)}, "mu != 0");
                      const Vec residual = vadd(vscale(cert.lambda[0], at.grad_f),
                                                vscale(cert.mu[0], at.grad_h[0]));
                      ACCEPT(is_zero(residual), "multipliers do not recombine to zero");
                  }
                  return "lambda_0 = 1, mu = 0 in both modes, recombination exact";
              });

    criterion(4, "variational principle on 200 finite spaces, base and scaled form",
              kSlowBudgetMs, [&] {
                  const SuiteResult res =
                      run_corpus_suite("suite-ekeland-spaces.json", "ekeland-spaces");
                  ACCEPT(res.instances == 200, "expected 200 spaces");
                  return std::to_string(res.checked) + " conclusions re-verified exactly";
              });

    criterion(5, "cone biduality and separator validity on 100 random cones", 0, [&] {
        const SuiteResult res = run_corpus_suite("suite-cone-biduality.json", "cone-biduality");
        ACCEPT(res.instances == 100, "expected 100 cones");
        return std::to_string(res.checked) + " membership/separator assertions";
    });

    criterion(6, "polytope containment vs support-function dominance on 100 pairs", 0, [&] {
        const SuiteResult res =
            run_corpus_suite("suite-polytope-support.json", "polytope-support");
        ACCEPT(res.instances == 100, "expected 100 pairs");
        return std::to_string(res.checked) + " containment assertions";
    });

    criterion(7, "convex subdifferentials: support values and subgradient inequality", 0, [&] {
        const SuiteResult res =
            run_corpus_suite("suite-subdiff-consistency.json", "subdiff-consistency");
        ACCEPT(res.instances == 200, "expected 200 instances");
        // Per instance: 4 directional comparisons plus one assertion
        // aggregating the exact subgradient inequality over 300 probe points.
        ACCEPT(res.checked >= 200 * 5, "expected 4 directions + 1 probe batch each");
        return std::to_string(res.checked) +
               " assertions (300 probe points per instance), directional tolerance 1e-6";
    });

    criterion(8, "multiplier necessity on independently solved programs", 0, [&] {
        const SuiteResult res = run_corpus_suite("suite-fj-necessity.json", "fj-necessity");
        ACCEPT(res.instances == 80, "expected 50 linear + 30 max-affine instances");
        return std::to_string(res.checked) + " certificates at certified minimizers";
    });

    criterion(9, "quasidifferential formula vs numeric, scale involution on the corpus", 0, [&] {
        const SuiteResult res = run_corpus_suite("suite-qd-directional.json", "qd-directional");
        ACCEPT(res.instances == 200, "expected 200 instances");
        std::size_t pairs = 0;
        for (const auto& entry : std::filesystem::directory_iterator(g_dir)) {
            if (entry.path().extension() != ".json") continue;
            const ParsedFile f = parse_problem_file(entry.path().string());
            if (f.kind != FileKind::Program) continue;
            std::vector<Expr> exprs{f.program.objective};
            for (const auto& g : f.program.ineqs) exprs.push_back(g);
            for (const auto& h : f.program.eqs) exprs.push_back(h);
            for (const auto& e : exprs) {
                QuasiDifferential q;
                try {
                    q = qd_of_expr(e, f.point);
                } catch (const InputError&) {
                    continue;  // outside the quasidifferentiable fragment
                }
                for (const Rational& c : {Rational(-1), Rational(-2)}) {
                    const QuasiDifferential s = qd_scale(c, q);
                    ACCEPT(polytope_set_equal(s.sub, scale(c, q.super)),
                           "scaled subdifferential != scaled superdifferential");
                    ACCEPT(polytope_set_equal(s.super, scale(c, q.sub)),
                           "scaled superdifferential != scaled subdifferential");
                    ++pairs;
                }
            }
        }
        ACCEPT(pairs >= 16, "too few corpus expressions in the fragment");
        return std::to_string(res.checked) + " suite assertions; involution exact on " +
               std::to_string(pairs) + " corpus pairs";
    });

    criterion(10, "numeric generalized quotients stay below exact support values", 0, [&] {
        const SuiteResult res = run_corpus_suite("suite-clarke-bounds.json", "clarke-bounds");
        ACCEPT(res.instances == 100, "expected 50 calibrated + 50 sum-rule instances");
        std::size_t checked = 0;
        for (const auto& entry : std::filesystem::directory_iterator(g_dir)) {
            if (entry.path().extension() != ".json") continue;
            const ParsedFile f = parse_problem_file(entry.path().string());
            if (f.kind != FileKind::Program) continue;
            ClarkeGradient g;
            try {
                g = clarke_subdifferential(f.program.objective, f.point);
            } catch (const InputError&) {
                continue;  // outside the Lipschitz fragment
            }
            std::vector<Vec> dirs;
            const std::size_t n = f.program.dim;
            for (std::size_t i = 0; i < n; ++i) {
                Vec e = vzero(n);
                e[i] = 1;
                dirs.push_back(e);
                dirs.push_back(vneg(e));
            }
            dirs.push_back(Vec(n, Rational(1)));
            for (const auto& v : dirs) {
                const Rational support = clarke_directional(g, v);
                const DirDeriv fo = fo_numeric(f.program.objective, f.point, v);
                ACCEPT(fo.estimate <= static_cast<double>(support) + kFoBoundTol,
                       "numeric quotient exceeds the support value at tolerance 1e-4");
                ++checked;
            }
        }
        ACCEPT(checked >= 20, "too few corpus objectives in the fragment");
        return std::to_string(res.checked) + " suite assertions; bound held on " +
               std::to_string(checked) + " corpus directions";
    });

    criterion(11, "constraint qualification implications audited on 100 instances", 0, [&] {
        const SuiteResult res = run_corpus_suite("suite-cq-audit.json", "cq-audit");
        ACCEPT(res.instances == 100, "expected 100 instances");
        return std::to_string(res.checked) +
               " audit assertions; zero independence-implication violations, every "
               "interior witness certified";
    });

    criterion(12, "set-valued minimality chain and the scalar multiplier instance", 0, [&] {
        const SuiteResult chain = run_suite("setvalued-chain", 909091);
        std::string detail;
        for (const auto& msg : chain.failures) detail += "\n    " + msg;
        ACCEPT(chain.passed, "setvalued-chain suite failed" + detail);
        ACCEPT(chain.instances == 200, "expected 200 sampled maps");

        const ParsedFile f = load("setvalued-line.json");
        ACCEPT(f.setvalued.has_value(), "missing set-valued payload");
        const SetValuedFJResult res = sv_fritz_john(*f.setvalued);
        ACCEPT(res.found, "no multiplier pair found");
        ACCEPT(res.t == Vec{Rational(1, 2)}, "t != 1/2");
        ACCEPT(res.u == Vec{Rational(1, 2)}, "u != 1/2");
        ACCEPT(dot(res.u, f.setvalued->zstar) == Rational(0), "u not orthogonal to z*");
        ACCEPT(res.regularity, "instance not flagged regular");
        ACCEPT(res.epiderivative_defined, "epiderivative not defined");
        ACCEPT(!is_zero(res.t), "regularity must force t != 0");
        return std::to_string(chain.checked) +
               " chain assertions; t = u = 1/2 exact, u(z*) = 0, regularity forces t != 0";
    });

    bool all_pass = true;
    for (const auto& o : results) {
        all_pass = all_pass && o.pass;
        std::cout << "criterion " << o.id << ": " << (o.pass ? "PASS" : "FAIL") << " ["
                  << static_cast<long>(o.ms) << " ms] " << o.what;
        if (!o.note.empty()) std::cout << " -- " << o.note;
        std::cout << "\n";
    }
    std::cout << (all_pass ? "acceptance: all 12 criteria pass"
                           : "acceptance: FAILURES present")
              << "\n";
    return all_pass ? 0 : 1;
}
