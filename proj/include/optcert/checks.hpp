#pragma once

// The check dispatcher behind the command line: routes a parsed instance
// file to a multiplier search, a constraint-qualification test, a
// subdifferential computation, the variational-principle engine, or a seeded
// property suite, and renders the result as a machine-readable report.
// Reports carry no timestamps, so two runs over the same file are
// byte-identical; every "holds" embeds the data needed to re-verify the
// certificate by hand and every "fails" embeds a refutation.

#include <algorithm>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "optcert/clarke.hpp"
#include "optcert/convex.hpp"
#include "optcert/ekeland.hpp"
#include "optcert/problem_io.hpp"
#include "optcert/quasidiff.hpp"
#include "optcert/setvalued.hpp"
#include "optcert/smooth_kkt.hpp"
#include "optcert/suites.hpp"

namespace optcert {

inline constexpr const char* kToolName = "optcert";
inline constexpr const char* kToolVersion = "1.0.0";

// Exit convention: 0 holds, 1 fails/refuted, 2 inconclusive, 3 input error.
enum class CheckExit : int { Holds = 0, Fails = 1, Inconclusive = 2, InputProblem = 3 };

struct CheckReport {
    json doc;
    int exit_status = 0;
};

namespace checkdetail {

inline std::string theory_of(const std::string& check, const ParsedFile& f) {
    if (check == "kkt" || check == "fj-smooth" || check == "subdiff:smooth" ||
        check.rfind("cq:", 0) == 0)
        return "smooth";
    if (check == "fj-convex" || check == "subdiff:convex") return "convex";
    if (check == "fj-lipschitz" || check == "subdiff:clarke" || check == "ekeland")
        return "clarke";
    if (check == "fj-quasidiff" || check == "qd-inclusion" || check == "subdiff:quasidiff")
        return "quasidiff";
    if (check == "fj-setvalued") return "setvalued";
    if (check == "suite") {
        if (f.suite == "ekeland-spaces" || f.suite == "clarke-bounds") return "clarke";
        if (f.suite == "qd-directional") return "quasidiff";
        if (f.suite == "cq-audit") return "smooth";
        if (f.suite == "setvalued-chain") return "setvalued";
        return "convex";
    }
    return "smooth";
}

inline int exit_of_status(const std::string& status) {
    if (status == "holds") return static_cast<int>(CheckExit::Holds);
    if (status == "fails") return static_cast<int>(CheckExit::Fails);
    if (status == "inconclusive") return static_cast<int>(CheckExit::Inconclusive);
    return static_cast<int>(CheckExit::InputProblem);
}

inline json witnesses_to_json(const std::vector<std::pair<std::size_t, Vec>>& ws) {
    json out = json::array();
    for (const auto& [idx, v] : ws) {
        json w;
        w["set"] = idx;
        w["subgradient"] = print_vec(v);
        out.push_back(std::move(w));
    }
    return out;
}

inline void certificate_into(json& rec, const Certificate& cert) {
    rec["status"] = to_string(cert.status);
    json mult;
    mult["lambda"] = print_vec(cert.lambda);
    mult["mu"] = print_vec(cert.mu);
    rec["multipliers"] = std::move(mult);
    if (!cert.witnesses.empty()) rec["witnesses"] = witnesses_to_json(cert.witnesses);
    if (cert.refutation) rec["refutation"] = print_vec(*cert.refutation);
    if (!cert.normalization.empty()) rec["normalization"] = cert.normalization;
}

// First-order data at the query point, either differentiated from the
// expressions or taken from the file's gradient overrides. Feasibility and
// activity are always evaluated from the expressions.
inline SmoothProblemAtPoint smooth_at(const ParsedFile& f) {
    if (!f.gradients) return smooth_problem_at_point(f.program, f.point);
    const Program& prob = f.program;
    SmoothProblemAtPoint p;
    p.dim = prob.dim;
    p.xstar = f.point;
    p.num_ineqs = prob.ineqs.size();
    p.source = GradientSource::UserSupplied;
    p.grad_f = f.gradients->objective;
    for (std::size_t i = 0; i < prob.ineqs.size(); ++i) {
        const int s = sign_of(eval(prob.ineqs[i], f.point));
        if (s > 0) throw PreconditionError("x* violates inequality " + std::to_string(i));
        if (s == 0) {
            p.active.push_back(i);
            p.grad_g_active.push_back(f.gradients->inequalities[i]);
        }
    }
    for (std::size_t j = 0; j < prob.eqs.size(); ++j) {
        if (sign_of(eval(prob.eqs[j], f.point)) != 0)
            throw PreconditionError("x* violates equality " + std::to_string(j));
        p.grad_h.push_back(f.gradients->equalities[j]);
    }
    return p;
}

inline json smooth_data_to_json(const SmoothProblemAtPoint& p) {
    json out;
    out["objective_gradient"] = print_vec(p.grad_f);
    json act = json::array();
    for (std::size_t k = 0; k < p.active.size(); ++k) {
        json a;
        a["index"] = p.active[k];
        a["gradient"] = print_vec(p.grad_g_active[k]);
        act.push_back(std::move(a));
    }
    out["active_inequalities"] = std::move(act);
    json eqs = json::array();
    for (const auto& g : p.grad_h) eqs.push_back(print_vec(g));
    out["equality_gradients"] = std::move(eqs);
    out["source"] =
        p.source == GradientSource::FromExpr ? "expression" : "user-supplied";
    return out;
}

inline json vertices_to_json(const VPolytope& p) {
    json out = json::array();
    for (const auto& v : p.vertices) out.push_back(print_vec(v));
    return out;
}

inline json regularity_to_json(const RegularityReport& rep) {
    json out;
    out["continuous_at_x"] = rep.continuous_at_x;
    out["discontinuity_in_every_ball"] = rep.discontinuity_in_every_ball;
    out["frechet_ok"] = rep.frechet_ok;
    out["fitted_gradient"] = rep.fitted_gradient;
    json ws = json::array();
    for (const auto& w : rep.witnesses) {
        json wj;
        wj["scale_k"] = w.scale_k;
        wj["point"] = print_vec(w.point);
        wj["jump"] = w.jump;
        ws.push_back(std::move(wj));
    }
    out["witnesses"] = std::move(ws);
    return out;
}

inline void attach_regularity(json& rec, const ParsedFile& f) {
    json probes = json::array();
    auto probe_one = [&](const std::string& label, const Expr& e) {
        json p;
        p["function"] = label;
        p["report"] = regularity_to_json(regularity_probe(e, f.point));
        probes.push_back(std::move(p));
    };
    probe_one("objective", f.program.objective);
    for (std::size_t i = 0; i < f.program.ineqs.size(); ++i)
        probe_one("inequality " + std::to_string(i), f.program.ineqs[i]);
    for (std::size_t j = 0; j < f.program.eqs.size(); ++j)
        probe_one("equality " + std::to_string(j), f.program.eqs[j]);
    rec["regularity_probe"] = std::move(probes);
    rec["numeric_evidence"] = true;
    rec["float_tolerance"] = float_tolerance();
}

inline void require_kind(const ParsedFile& f, FileKind want, const std::string& check) {
    if (f.kind != want)
        throw InputError("check '" + check + "' needs a " + std::string(to_string(want)) +
                         " instance; this file is kind '" + to_string(f.kind) + "'");
}

} // namespace checkdetail

// Runs one named check against a parsed instance and returns its record.
// Throws (InputError and friends) on fragment mismatches or malformed
// queries; run_check wraps the throw into an exit-3 report.
inline json run_check_record(const ParsedFile& f, const std::string& check) {
    using namespace checkdetail;
    json rec;
    rec["check"] = check;
    rec["theory"] = theory_of(check, f);
    rec["numeric_evidence"] = false;

    if (check == "kkt" || check == "fj-smooth") {
        require_kind(f, FileKind::Program, check);
        const SmoothProblemAtPoint at = smooth_at(f);
        const Certificate cert = kkt_fj_smooth(
            at, check == "kkt" ? MultiplierMode::Kkt : MultiplierMode::FritzJohn);
        certificate_into(rec, cert);
        rec["gradients"] = smooth_data_to_json(at);
        if (f.attach_regularity) attach_regularity(rec, f);
        return rec;
    }
    if (check == "fj-convex") {
        require_kind(f, FileKind::Program, check);
        certificate_into(rec, fritz_john_convex(f.program, f.point));
        return rec;
    }
    if (check == "fj-lipschitz") {
        require_kind(f, FileKind::Program, check);
        certificate_into(rec, fritz_john_lipschitz(f.program, f.point));
        return rec;
    }
    if (check == "fj-quasidiff") {
        require_kind(f, FileKind::Program, check);
        certificate_into(rec, qd_weakened_fj(f.program, f.point));
        return rec;
    }
    if (check == "qd-inclusion") {
        require_kind(f, FileKind::Program, check);
        const QdInclusionResult inc = qd_constrained_check(f.program, f.point);
        rec["status"] = inc.holds ? "holds" : "fails";
        rec["lhs_vertices"] = vertices_to_json(inc.lhs);
        rec["rhs_vertices"] = vertices_to_json(inc.rhs);
        if (inc.offending_vertex) rec["refutation"] = print_vec(*inc.offending_vertex);
        return rec;
    }
    if (check == "fj-setvalued") {
        require_kind(f, FileKind::SetValued, check);
        const SetValuedFJResult res = sv_fritz_john(*f.setvalued);
        rec["status"] = res.found ? "holds" : "fails";
        json mult;
        mult["t"] = print_vec(res.t);
        mult["u"] = print_vec(res.u);
        rec["multipliers"] = std::move(mult);
        rec["regularity"] = res.regularity;
        rec["epiderivative_defined"] = res.epiderivative_defined;
        json dirs;
        json rays = json::array();
        for (const auto& r : res.directions.rays) rays.push_back(print_vec(r));
        json lines = json::array();
        for (const auto& l : res.directions.lines) lines.push_back(print_vec(l));
        dirs["rays"] = std::move(rays);
        dirs["lines"] = std::move(lines);
        rec["directions"] = std::move(dirs);
        if (res.found) {
            rec["normalization"] = "sum of absolute multiplier components equals 1";
            rec["u_dot_zstar"] = print_rational(dot(res.u, f.setvalued->zstar));
        } else {
            rec["refutation_note"] =
                "componentwise maximization over the admissible multiplier polytope "
                "returned zero in every coordinate";
        }
        if (!res.note.empty()) rec["note"] = res.note;
        return rec;
    }
    if (check.rfind("cq:", 0) == 0) {
        require_kind(f, FileKind::Program, check);
        const std::string which = check.substr(3);
        CqRequest req;
        if (which == "licq")
            req.which = CqKind::Licq;
        else if (which == "mfcq")
            req.which = CqKind::Mfcq;
        else if (which == "slater")
            req.which = CqKind::Slater;
        else if (which == "abadie-polyhedral")
            req.which = CqKind::AbadiePolyhedral;
        else
            throw InputError("unknown constraint qualification '" + which +
                             "' (use licq, mfcq, slater, or abadie-polyhedral)");
        if (req.which == CqKind::Licq || req.which == CqKind::Mfcq) {
            req.at = smooth_at(f);
        } else if (req.which == CqKind::Slater) {
            req.program = f.program;
            req.point = f.slater_point;  // absent witness -> cq_check raises InputError
        } else {
            req.program = f.program;
            req.point = f.point;
        }
        const CqResult res = cq_check(req);
        rec["status"] = res.holds ? "holds" : "fails";
        rec["qualification"] = to_string(res.which);
        rec["evidence"] = res.evidence;
        if (res.witness) rec["witness"] = print_vec(*res.witness);
        rec["slack"] = print_rational(res.slack);
        return rec;
    }
    if (check == "subdiff:convex") {
        require_kind(f, FileKind::Program, check);
        rec["status"] = "holds";
        rec["vertices"] = vertices_to_json(convex_subdifferential(f.program.objective, f.point));
        return rec;
    }
    if (check == "subdiff:clarke") {
        require_kind(f, FileKind::Program, check);
        const ClarkeGradient g = clarke_subdifferential(f.program.objective, f.point);
        rec["status"] = "holds";
        rec["vertices"] = vertices_to_json(g.set);
        rec["exactness"] = g.exactness == ClarkeExactness::RegularEquality
                               ? "regular-equality"
                               : "inclusion-overapprox";
        return rec;
    }
    if (check == "subdiff:quasidiff") {
        require_kind(f, FileKind::Program, check);
        const QuasiDifferential q = qd_of_expr(f.program.objective, f.point);
        rec["status"] = "holds";
        rec["sub_vertices"] = vertices_to_json(q.sub);
        rec["super_vertices"] = vertices_to_json(q.super);
        return rec;
    }
    if (check == "subdiff:smooth") {
        require_kind(f, FileKind::Program, check);
        rec["status"] = "holds";
        rec["gradient"] = print_vec(exact_gradient(f.program.objective, f.point));
        return rec;
    }
    if (check == "ekeland") {
        require_kind(f, FileKind::Ekeland, check);
        const EkelandResult res =
            ekeland_point(*f.space, f.values, f.start, f.epsilon, f.lambda);
        const bool ok = res.check_i && res.check_ii && res.check_iii;
        rec["status"] = ok ? "holds" : "fails";
        rec["point"] = res.y_label;
        json its = json::array();
        for (const auto& it : res.iterates) {
            json ij;
            ij["center"] = f.space->points[it.z];
            json members = json::array();
            for (const auto m : it.members) members.push_back(f.space->points[m]);
            ij["members"] = std::move(members);
            its.push_back(std::move(ij));
        }
        rec["iterates"] = std::move(its);
        rec["conclusions"] = {{"i", res.check_i}, {"ii", res.check_ii}, {"iii", res.check_iii}};
        rec["epsilon"] = print_rational(f.epsilon);
        rec["lambda"] = print_rational(f.lambda);
        return rec;
    }
    if (check == "suite") {
        require_kind(f, FileKind::Suite, check);
        const SuiteResult res = run_suite(f.suite, f.seed);
        rec["status"] = res.passed ? "holds" : "fails";
        rec["suite"] = res.suite;
        rec["seed"] = res.seed;
        rec["instances"] = res.instances;
        rec["assertions"] = res.checked;
        if (!res.failures.empty()) rec["failures"] = res.failures;
        const bool numeric = res.suite == "subdiff-consistency" ||
                             res.suite == "qd-directional" || res.suite == "clarke-bounds";
        rec["numeric_evidence"] = numeric;
        return rec;
    }
    throw InputError("unknown check '" + check + "'");
}

inline CheckReport run_check(const ParsedFile& f, const std::string& check) {
    CheckReport out;
    out.doc["tool"] = std::string(kToolName) + " " + kToolVersion;
    json input;
    if (!f.name.empty()) input["name"] = f.name;
    input["kind"] = to_string(f.kind);
    input["digest"] = input_digest(f);
    out.doc["input"] = std::move(input);
    json records = json::array();
    try {
        records.push_back(run_check_record(f, check));
        out.exit_status = checkdetail::exit_of_status(records.back()["status"]);
    } catch (const Error& ex) {
        json rec;
        rec["check"] = check;
        rec["status"] = "error";
        rec["message"] = ex.what();
        records.push_back(std::move(rec));
        out.exit_status = static_cast<int>(CheckExit::InputProblem);
    }
    out.doc["checks"] = std::move(records);
    out.doc["exit_status"] = out.exit_status;
    return out;
}

// --- corpus ------------------------------------------------------------------

struct CorpusResult {
    json summary;
    int exit_status = 0;
};

namespace checkdetail {

// Optional exact assertions shipped with an expect entry: each key is a JSON
// pointer into the produced record, each value the exact JSON expected there.
inline bool details_match(const json& details, const json& record, std::string& why) {
    if (details.is_null()) return true;
    for (const auto& [ptr, want] : details.items()) {
        json got;
        try {
            got = record.at(json::json_pointer(ptr));
        } catch (const json::exception&) {
            why = "record has no element at '" + ptr + "'";
            return false;
        }
        if (got != want) {
            why = "mismatch at '" + ptr + "': expected " + want.dump() + ", got " + got.dump();
            return false;
        }
    }
    return true;
}

} // namespace checkdetail

// Runs every instance file in `dir` whose name matches `filter` (substring;
// empty matches all) against its embedded expectations. Exit is nonzero iff
// any expectation fails; a filter matching nothing is a warning, not an
// error.
inline CorpusResult corpus_run(const std::string& dir, const std::string& filter = "") {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw InputError("corpus directory '" + dir + "' not found");
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());

    CorpusResult out;
    out.summary["tool"] = std::string(kToolName) + " " + kToolVersion;
    json instances = json::array();
    std::size_t checks_run = 0, mismatches = 0, matched_files = 0;

    for (const auto& path : files) {
        const std::string base = fs::path(path).filename().string();
        if (!filter.empty() && base.find(filter) == std::string::npos) continue;
        ++matched_files;
        json inst;
        inst["file"] = base;
        try {
            const ParsedFile f = parse_problem_file(path);
            inst["name"] = f.name.empty() ? base : f.name;
            inst["digest"] = input_digest(f);
            if (f.provenance.empty()) {
                inst["error"] = "corpus instance lacks a provenance string";
                ++mismatches;
            }
            if (f.expect.empty()) {
                inst["error"] = "corpus instance lacks expected outcomes";
                ++mismatches;
            }
            json checks = json::array();
            for (const auto& e : f.expect) {
                ++checks_run;
                json cj;
                cj["check"] = e.check;
                cj["expected"] = e.status;
                const CheckReport rep = run_check(f, e.check);
                const json& rec = rep.doc["checks"][0];
                const std::string actual = rec["status"];
                cj["actual"] = actual;
                std::string why;
                const bool status_ok = (actual == e.status);
                const bool details_ok = checkdetail::details_match(e.details, rec, why);
                cj["match"] = status_ok && details_ok;
                if (!status_ok && rec.contains("message")) cj["message"] = rec["message"];
                if (!details_ok) cj["detail_mismatch"] = why;
                if (!(status_ok && details_ok)) ++mismatches;
                checks.push_back(std::move(cj));
            }
            inst["checks"] = std::move(checks);
        } catch (const Error& ex) {
            inst["error"] = ex.what();
            ++mismatches;
        }
        instances.push_back(std::move(inst));
    }

    out.summary["instances"] = std::move(instances);
    out.summary["checks_run"] = checks_run;
    out.summary["mismatches"] = mismatches;
    out.summary["all_match"] = (mismatches == 0);
    if (matched_files == 0 && !filter.empty())
        out.summary["warning"] = "filter '" + filter + "' matched no corpus instance";
    out.exit_status = mismatches == 0 ? 0 : 1;
    out.summary["exit_status"] = out.exit_status;
    return out;
}

} // namespace optcert
