// optcert command-line front end.
//
//   optcert check <file> --check <name> [--mode kkt|fj] [--json out.json]
//   optcert corpus run [--filter s] [--dir d] [--json out.json]
//   optcert ekeland <space-file> --f <values> --z <label> --eps p/q [--lambda p/q]
//
// Exit codes: 0 the checked condition holds, 1 it fails (with an embedded
// refutation), 2 inconclusive, 3 input or usage error. Reports go to stdout
// as JSON; --json additionally writes them to a file.

#include <cctype>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "optcert/checks.hpp"

namespace {

using namespace optcert;

Rational cli_rational(const std::string& s, const std::string& what) {
    const auto bad = [&](const std::string& extra) -> Rational {
        throw InputError(what + ": bad rational '" + s + "'" + extra);
    };
    std::size_t i = 0;
    bool negative = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        negative = (s[i] == '-');
        ++i;
    }
    const std::size_t num_begin = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == num_begin) return bad("");
    Int num{s.substr(num_begin, i - num_begin)};
    Int den{1};
    if (i < s.size()) {
        if (s[i] != '/') return bad("");
        ++i;
        const std::size_t den_begin = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == den_begin || i != s.size()) return bad("");
        den = Int{s.substr(den_begin, i - den_begin)};
        if (den == 0) return bad(": zero denominator");
    }
    Rational r{num};
    r /= Rational{den};
    return negative ? Rational(-r) : r;
}

Vec cli_rational_list(const std::string& csv, const std::string& what) {
    Vec out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        if (comma == std::string::npos) comma = csv.size();
        out.push_back(cli_rational(csv.substr(start, comma - start), what));
        start = comma + 1;
    }
    return out;
}

// Metric file format: first line n, then an n-by-n matrix of rationals
// (whitespace separated). Points are labeled p0..p{n-1}.
FiniteMetricSpace read_space_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open metric space file '" + path + "'");
    std::size_t n = 0;
    if (!(in >> n) || n == 0)
        throw InputError("metric space file must start with the point count");
    Mat dist(n, Vec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            std::string tok;
            if (!(in >> tok))
                throw InputError("metric space file ends before the " +
                                 std::to_string(n) + "-by-" + std::to_string(n) +
                                 " matrix is complete");
            dist[i][j] = cli_rational(tok, "distance entry");
        }
    return metric_space_from_matrix(std::move(dist));
}

void emit(const json& doc, const std::string& json_out) {
    const std::string text = doc.dump(2) + "\n";
    std::cout << text;
    if (!json_out.empty()) {
        std::ofstream out(json_out);
        if (!out) throw InputError("cannot write report to '" + json_out + "'");
        out << text;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact certificates for first-order optimality conditions"};
    app.require_subcommand(1);

    auto* check_cmd = app.add_subcommand("check", "run one named check against an instance file");
    std::string file, check_name, mode, check_json;
    check_cmd->add_option("file", file, "instance file (JSON)")->required();
    check_cmd
        ->add_option("--check", check_name,
                     "check name: kkt, fj-smooth, fj-convex, fj-lipschitz, fj-quasidiff, "
                     "qd-inclusion, fj-setvalued, cq:<licq|mfcq|slater|abadie-polyhedral>, "
                     "subdiff:<smooth|convex|clarke|quasidiff>, ekeland, suite")
        ->required();
    check_cmd->add_option("--mode", mode, "multiplier mode for the smooth checks")
        ->check(CLI::IsMember({"kkt", "fj"}));
    check_cmd->add_option("--json", check_json, "also write the report to this file");

    auto* corpus_cmd = app.add_subcommand("corpus", "operate on the regression corpus");
    corpus_cmd->require_subcommand(1);
    auto* run_cmd = corpus_cmd->add_subcommand(
        "run", "run every corpus instance against its embedded expected outcomes");
    std::string filter, corpus_dir = "corpus", corpus_json;
    run_cmd->add_option("--filter", filter, "substring filter on corpus file names");
    run_cmd->add_option("--dir", corpus_dir, "corpus directory");
    run_cmd->add_option("--json", corpus_json, "also write the summary to this file");

    auto* ek_cmd = app.add_subcommand(
        "ekeland", "run the variational-principle engine on a finite metric space");
    std::string space_file, f_csv, z_label, eps_str, lambda_str = "1", ek_json;
    ek_cmd->add_option("space", space_file,
                       "metric file: first line n, then an n-by-n matrix of rationals")
        ->required();
    ek_cmd->add_option("--f", f_csv, "comma-separated rational values of f at p0..p{n-1}")
        ->required();
    ek_cmd->add_option("--z", z_label, "start point label (p0..p{n-1})")->required();
    ek_cmd->add_option("--eps", eps_str, "epsilon as p/q")->required();
    ek_cmd->add_option("--lambda", lambda_str, "lambda as p/q (default 1)");
    ek_cmd->add_option("--json", ek_json, "also write the report to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (check_cmd->parsed()) {
            ParsedFile f = parse_problem_file(file);
            std::string name = check_name;
            if (!mode.empty()) {
                if (name != "kkt" && name != "fj-smooth")
                    throw InputError(
                        "--mode applies only to the smooth multiplier checks (kkt, fj-smooth)");
                name = (mode == "kkt") ? "kkt" : "fj-smooth";
            }
            const CheckReport rep = run_check(f, name);
            emit(rep.doc, check_json);
            return rep.exit_status;
        }
        if (run_cmd->parsed()) {
            const CorpusResult res = corpus_run(corpus_dir, filter);
            if (res.summary.contains("warning"))
                std::cerr << "warning: " << res.summary["warning"].get<std::string>() << "\n";
            emit(res.summary, corpus_json);
            return res.exit_status;
        }
        if (ek_cmd->parsed()) {
            ParsedFile f;
            f.kind = FileKind::Ekeland;
            f.space = read_space_file(space_file);
            f.values = cli_rational_list(f_csv, "--f");
            if (f.values.size() != f.space->points.size())
                throw InputError("--f supplies " + std::to_string(f.values.size()) +
                                 " values for a space with " +
                                 std::to_string(f.space->points.size()) + " points");
            const auto& labels = f.space->points;
            const auto it = std::find(labels.begin(), labels.end(), z_label);
            if (it == labels.end())
                throw InputError("--z: unknown point label '" + z_label + "'");
            f.start = static_cast<std::size_t>(it - labels.begin());
            f.epsilon = cli_rational(eps_str, "--eps");
            f.lambda = cli_rational(lambda_str, "--lambda");
            const CheckReport rep = run_check(f, "ekeland");
            emit(rep.doc, ek_json);
            return rep.exit_status;
        }
    } catch (const Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    }
    return 3;
}
