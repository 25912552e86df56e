#pragma once

// Problem-file I/O. Instances are JSON documents; every rational is a string
// "p/q" (or "p") so no float ever enters the exact track, and expression
// trees are tagged objects {"op": ..., "args": [...]}. Parsing validates
// structure with line-anchored messages; printing is canonical (sorted keys,
// two-space indent), so the digest of a parsed file is reproducible and
// parse(print(file)) round-trips to the same reports byte for byte.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "optcert/certificate.hpp"
#include "optcert/ekeland.hpp"
#include "optcert/expr.hpp"
#include "optcert/rational.hpp"
#include "optcert/setvalued.hpp"

namespace optcert {

using nlohmann::json;

// Thrown for any structural problem in an instance file; the message is
// already anchored ("line 12: /equalities/0/op: ...").
class ParseError : public InputError {
  public:
    using InputError::InputError;
};

// --- digests -----------------------------------------------------------------

inline std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[h & 0xf];
        h >>= 4;
    }
    return "fnv1a64:" + out;
}

// --- line anchoring ----------------------------------------------------------

// Maps JSON-pointer paths ("/equalities/0/op") to 1-based line numbers. The
// text has already been syntax-checked by the JSON parser, so this scanner
// only needs to track strings, nesting, and commas.
class JsonLocator {
  public:
    explicit JsonLocator(const std::string& text) { index(text); }

    // Line of the value at `pointer`, or 0 when unknown.
    int line_of(const std::string& pointer) const {
        auto it = lines_.find(pointer);
        return it == lines_.end() ? 0 : it->second;
    }

  private:
    struct Frame {
        bool is_object = false;
        std::size_t next_index = 0;
        std::string key;
        bool expecting_key = false;
    };

    static std::string escape(const std::string& key) {
        std::string out;
        for (const char c : key) {
            if (c == '~')
                out += "~0";
            else if (c == '/')
                out += "~1";
            else
                out += c;
        }
        return out;
    }

    void record(const std::vector<Frame>& stack, int line) {
        std::string path;
        for (const auto& f : stack) {
            path += '/';
            path += f.is_object ? escape(f.key) : std::to_string(f.next_index);
        }
        if (path.empty()) path = "";  // root
        lines_.emplace(path, line);
    }

    void index(const std::string& text) {
        std::vector<Frame> stack;
        int line = 1;
        std::size_t i = 0;
        const std::size_t n = text.size();
        auto skip_string = [&](std::size_t from) {
            std::size_t j = from + 1;  // past opening quote
            std::string content;
            while (j < n) {
                const char c = text[j];
                if (c == '\\') {
                    if (j + 1 < n && text[j + 1] == 'u') {
                        j += 6;
                    } else {
                        if (j + 1 < n) content += text[j + 1];
                        j += 2;
                    }
                    continue;
                }
                if (c == '"') break;
                if (c == '\n') ++line;
                content += c;
                ++j;
            }
            return std::make_pair(j + 1, content);
        };
        while (i < n) {
            const char c = text[i];
            if (c == '\n') {
                ++line;
                ++i;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r') {
                ++i;
                continue;
            }
            if (c == '"') {
                const bool is_key = !stack.empty() && stack.back().is_object &&
                                    stack.back().expecting_key;
                auto [next, content] = skip_string(i);
                if (is_key) {
                    stack.back().key = content;
                    stack.back().expecting_key = false;
                } else {
                    record(stack, line);
                }
                i = next;
                continue;
            }
            if (c == '{' || c == '[') {
                record(stack, line);
                Frame f;
                f.is_object = (c == '{');
                f.expecting_key = f.is_object;
                stack.push_back(f);
                ++i;
                continue;
            }
            if (c == '}' || c == ']') {
                if (!stack.empty()) stack.pop_back();
                if (!stack.empty() && !stack.back().is_object) ++stack.back().next_index;
                ++i;
                continue;
            }
            if (c == ',') {
                if (!stack.empty()) {
                    if (stack.back().is_object)
                        stack.back().expecting_key = true;
                    else
                        ++stack.back().next_index;
                }
                ++i;
                continue;
            }
            if (c == ':') {
                ++i;
                continue;
            }
            // Number or literal: record and skip to the next delimiter.
            record(stack, line);
            while (i < n && text[i] != ',' && text[i] != '}' && text[i] != ']' &&
                   text[i] != '\n')
                ++i;
            continue;
        }
    }

    std::map<std::string, int> lines_;
};

namespace ioloc {

// A cursor into the document: the locator plus the JSON-pointer path of the
// node currently being validated.
struct At {
    const JsonLocator* loc = nullptr;
    std::string path;

    At operator/(const std::string& key) const { return {loc, path + "/" + key}; }
    At operator/(std::size_t index) const { return {loc, path + "/" + std::to_string(index)}; }

    [[noreturn]] void fail(const std::string& msg) const {
        std::string where;
        if (loc) {
            const int line = loc->line_of(path);
            if (line > 0) where += "line " + std::to_string(line) + ": ";
        }
        where += path.empty() ? std::string("/") : path;
        throw ParseError(where + ": " + msg);
    }
};

} // namespace ioloc

// --- rationals ---------------------------------------------------------------

// Strict "p/q" grammar: optional sign, digits, optionally '/' and a positive
// denominator. Anything else — including JSON numbers — is rejected so float
// literals can never leak into the exact track.
inline Rational parse_rational_string(const std::string& s, const ioloc::At& at) {
    std::size_t i = 0;
    const std::size_t n = s.size();
    auto bad = [&]() -> Rational { at.fail("bad rational '" + s + "'"); };
    bool negative = false;
    if (i < n && (s[i] == '+' || s[i] == '-')) {
        negative = (s[i] == '-');
        ++i;
    }
    const std::size_t num_begin = i;
    while (i < n && s[i] >= '0' && s[i] <= '9') ++i;
    if (i == num_begin) return bad();
    std::string num = s.substr(num_begin, i - num_begin);
    if (negative) num.insert(num.begin(), '-');
    if (i == n) return Rational(Int(num));
    if (s[i] != '/') return bad();
    ++i;
    const std::size_t den_begin = i;
    while (i < n && s[i] >= '0' && s[i] <= '9') ++i;
    if (i == den_begin || i != n) return bad();
    const Int den(s.substr(den_begin));
    if (den == 0) at.fail("bad rational '" + s + "': zero denominator");
    Rational r{Int(num)};
    r /= Rational(den);
    return r;
}

inline Rational rational_field(const json& j, const ioloc::At& at) {
    if (j.is_number())
        at.fail("rationals must be strings like \"3/4\"; numeric literals are forbidden");
    if (!j.is_string()) at.fail("expected a rational string \"p/q\"");
    return parse_rational_string(j.get<std::string>(), at);
}

inline std::string print_rational(const Rational& r) {
    std::ostringstream os;
    os << numerator(r);
    if (denominator(r) != 1) os << '/' << denominator(r);
    return os.str();
}

inline Vec vec_field(const json& j, const ioloc::At& at) {
    if (!j.is_array()) at.fail("expected an array of rational strings");
    Vec v;
    v.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(rational_field(j[i], at / i));
    return v;
}

inline json print_vec(const Vec& v) {
    json a = json::array();
    for (const auto& r : v) a.push_back(print_rational(r));
    return a;
}

inline Vec sized_vec_field(const json& j, std::size_t dim, const char* what,
                           const ioloc::At& at) {
    Vec v = vec_field(j, at);
    if (v.size() != dim)
        at.fail(std::string("dimension mismatch: ") + what + " has " +
                std::to_string(v.size()) + " coordinates, expected " + std::to_string(dim));
    return v;
}

// --- expressions -------------------------------------------------------------

namespace iodetail {

inline const json& member(const json& j, const char* key, const ioloc::At& at) {
    auto it = j.find(key);
    if (it == j.end()) at.fail(std::string("missing field '") + key + "'");
    return *it;
}

inline std::string string_field(const json& j, const ioloc::At& at) {
    if (!j.is_string()) at.fail("expected a string");
    return j.get<std::string>();
}

inline std::int64_t int_field(const json& j, const ioloc::At& at) {
    if (!j.is_number_integer()) at.fail("expected an integer");
    return j.get<std::int64_t>();
}

inline Relation relation_from_string(const std::string& s, const ioloc::At& at) {
    if (s == "<=") return Relation::LE;
    if (s == "<") return Relation::LT;
    if (s == "=") return Relation::EQ;
    if (s == ">=") return Relation::GE;
    if (s == ">") return Relation::GT;
    at.fail("unknown relation '" + s + "' (use <=, <, =, >=, >)");
}

inline const char* relation_to_string(Relation r) {
    switch (r) {
        case Relation::LE: return "<=";
        case Relation::LT: return "<";
        case Relation::EQ: return "=";
        case Relation::GE: return ">=";
        case Relation::GT: return ">";
    }
    return "?";
}

} // namespace iodetail

inline Expr expr_from_json(const json& j, const std::vector<std::string>& variables,
                           const ioloc::At& at) {
    using iodetail::int_field;
    using iodetail::member;
    using iodetail::string_field;
    if (!j.is_object()) at.fail("expected an expression object {\"op\": ...}");
    const std::string op = string_field(member(j, "op", at), at / "op");
    const std::size_t dim = variables.size();

    auto args_of = [&](std::size_t min_count) {
        const json& a = member(j, "args", at);
        const ioloc::At aat = at / "args";
        if (!a.is_array()) aat.fail("expected an array of expressions");
        if (a.size() < min_count)
            aat.fail("'" + op + "' needs at least " + std::to_string(min_count) +
                     " argument(s), got " + std::to_string(a.size()));
        std::vector<Expr> out;
        out.reserve(a.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            out.push_back(expr_from_json(a[i], variables, aat / i));
        return out;
    };

    if (op == "const") return constant(rational_field(member(j, "value", at), at / "value"));
    if (op == "var") {
        if (j.contains("name")) {
            const std::string name = string_field(j["name"], at / "name");
            for (std::size_t i = 0; i < variables.size(); ++i)
                if (variables[i] == name) return variable(i);
            (at / "name").fail("unknown variable '" + name + "'");
        }
        const std::int64_t idx = int_field(member(j, "index", at), at / "index");
        if (idx < 0 || static_cast<std::size_t>(idx) >= dim)
            (at / "index").fail("variable index " + std::to_string(idx) +
                                " out of range for " + std::to_string(dim) + " variables");
        return variable(static_cast<std::size_t>(idx));
    }
    if (op == "sum") return sum(args_of(1));
    if (op == "scale") {
        auto args = args_of(1);
        if (args.size() != 1) (at / "args").fail("'scale' takes exactly one argument");
        return scalar_mult(rational_field(member(j, "coeff", at), at / "coeff"),
                           std::move(args[0]));
    }
    if (op == "product") {
        auto args = args_of(2);
        if (args.size() != 2) (at / "args").fail("'product' takes exactly two arguments");
        return product(std::move(args[0]), std::move(args[1]));
    }
    if (op == "power") {
        auto args = args_of(1);
        if (args.size() != 1) (at / "args").fail("'power' takes exactly one argument");
        const std::int64_t e = int_field(member(j, "exponent", at), at / "exponent");
        return power(std::move(args[0]), static_cast<int>(e));
    }
    if (op == "exp" || op == "abs" || op == "reciprocal") {
        auto args = args_of(1);
        if (args.size() != 1)
            (at / "args").fail("'" + op + "' takes exactly one argument");
        if (op == "exp") return exp_of(std::move(args[0]));
        if (op == "abs") return abs_of(std::move(args[0]));
        return reciprocal(std::move(args[0]));
    }
    if (op == "max") return max_of(args_of(1));
    if (op == "min") return min_of(args_of(1));
    if (op == "piecewise") {
        const json& pj = member(j, "pieces", at);
        const ioloc::At pat = at / "pieces";
        if (!pj.is_array() || pj.empty()) pat.fail("expected a nonempty array of pieces");
        std::vector<Piece> pieces;
        for (std::size_t i = 0; i < pj.size(); ++i) {
            const ioloc::At iat = pat / i;
            if (!pj[i].is_object()) iat.fail("expected a piece object {guard, value}");
            const json& gj = member(pj[i], "guard", iat);
            const ioloc::At gat = iat / "guard";
            if (!gj.is_array()) gat.fail("expected an array of linear conditions");
            Guard guard;
            for (std::size_t k = 0; k < gj.size(); ++k) {
                const ioloc::At kat = gat / k;
                if (!gj[k].is_object()) kat.fail("expected {normal, rhs, rel}");
                LinCond cond;
                cond.normal = sized_vec_field(member(gj[k], "normal", kat), dim,
                                              "guard normal", kat / "normal");
                cond.rhs = rational_field(member(gj[k], "rhs", kat), kat / "rhs");
                cond.rel = iodetail::relation_from_string(
                    string_field(member(gj[k], "rel", kat), kat / "rel"), kat / "rel");
                guard.conds.push_back(std::move(cond));
            }
            Expr value = expr_from_json(member(pj[i], "value", iat), variables, iat / "value");
            pieces.push_back(Piece{std::move(guard), std::move(value)});
        }
        std::vector<JunctionGradient> anns;
        if (j.contains("junction_gradients")) {
            const json& aj = j["junction_gradients"];
            const ioloc::At aat = at / "junction_gradients";
            if (!aj.is_array()) aat.fail("expected an array of {point, gradient}");
            for (std::size_t i = 0; i < aj.size(); ++i) {
                const ioloc::At iat = aat / i;
                if (!aj[i].is_object()) iat.fail("expected {point, gradient}");
                JunctionGradient a;
                a.point = sized_vec_field(member(aj[i], "point", iat), dim,
                                          "junction point", iat / "point");
                a.gradient = sized_vec_field(member(aj[i], "gradient", iat), dim,
                                             "junction gradient", iat / "gradient");
                anns.push_back(std::move(a));
            }
        }
        return piecewise(std::move(pieces), std::move(anns));
    }
    (at / "op").fail("unknown node kind '" + op + "'");
}

inline json expr_to_json(const Expr& e, const std::vector<std::string>& variables) {
    json j;
    switch (e->kind) {
        case ExprKind::Constant:
            j["op"] = "const";
            j["value"] = print_rational(e->constant);
            return j;
        case ExprKind::Variable:
            j["op"] = "var";
            if (e->var_index < variables.size())
                j["name"] = variables[e->var_index];
            else
                j["index"] = e->var_index;
            return j;
        case ExprKind::Sum: j["op"] = "sum"; break;
        case ExprKind::ScalarMult:
            j["op"] = "scale";
            j["coeff"] = print_rational(e->coeff);
            break;
        case ExprKind::Product: j["op"] = "product"; break;
        case ExprKind::Power:
            j["op"] = "power";
            j["exponent"] = e->exponent;
            break;
        case ExprKind::Exp: j["op"] = "exp"; break;
        case ExprKind::Abs: j["op"] = "abs"; break;
        case ExprKind::Max: j["op"] = "max"; break;
        case ExprKind::Min: j["op"] = "min"; break;
        case ExprKind::Reciprocal: j["op"] = "reciprocal"; break;
        case ExprKind::Piecewise: {
            j["op"] = "piecewise";
            json pieces = json::array();
            for (const auto& p : e->pieces) {
                json guard = json::array();
                for (const auto& c : p.guard.conds) {
                    json cond;
                    cond["normal"] = print_vec(c.normal);
                    cond["rhs"] = print_rational(c.rhs);
                    cond["rel"] = iodetail::relation_to_string(c.rel);
                    guard.push_back(std::move(cond));
                }
                json piece;
                piece["guard"] = std::move(guard);
                piece["value"] = expr_to_json(p.value, variables);
                pieces.push_back(std::move(piece));
            }
            j["pieces"] = std::move(pieces);
            if (!e->junction_gradients.empty()) {
                json anns = json::array();
                for (const auto& a : e->junction_gradients) {
                    json ann;
                    ann["point"] = print_vec(a.point);
                    ann["gradient"] = print_vec(a.gradient);
                    anns.push_back(std::move(ann));
                }
                j["junction_gradients"] = std::move(anns);
            }
            return j;
        }
    }
    json args = json::array();
    for (const auto& a : e->args) args.push_back(expr_to_json(a, variables));
    j["args"] = std::move(args);
    return j;
}

// --- instance files ------------------------------------------------------------

enum class FileKind { Program, SetValued, Ekeland, Suite };

inline const char* to_string(FileKind k) {
    switch (k) {
        case FileKind::Program: return "program";
        case FileKind::SetValued: return "setvalued";
        case FileKind::Ekeland: return "ekeland";
        case FileKind::Suite: return "suite";
    }
    return "?";
}

// One expected-outcome assertion carried by a corpus instance.
struct ExpectEntry {
    std::string check;
    std::string status;  // holds | fails | inconclusive
    json details;        // optional exact fields to match against the record
};

// Gradient overrides: when present, multiplier checks use these rows instead
// of differentiating the expressions (GradientSource::UserSupplied).
struct GradientOverrides {
    Vec objective;
    Mat inequalities;  // one row per inequality
    Mat equalities;    // one row per equality
};

struct ParsedFile {
    FileKind kind = FileKind::Program;
    std::string name;
    std::string provenance;
    std::vector<ExpectEntry> expect;

    // kind == Program
    std::vector<std::string> variables;
    Program program;
    Vec point;
    std::optional<GradientOverrides> gradients;
    std::optional<Vec> slater_point;
    bool attach_regularity = false;

    // kind == SetValued
    std::optional<PolyhedralInstance> setvalued;

    // kind == Ekeland
    std::optional<FiniteMetricSpace> space;
    Vec values;
    std::size_t start = 0;
    Rational epsilon = 0;
    Rational lambda = 1;

    // kind == Suite
    std::string suite;
    std::uint64_t seed = 0;
};

namespace iodetail {

inline HRow hrow_from_json(const json& j, std::size_t dim, const ioloc::At& at) {
    if (!j.is_object()) at.fail("expected {normal, rhs}");
    HRow row;
    row.normal = sized_vec_field(member(j, "normal", at), dim, "row normal", at / "normal");
    row.rhs = rational_field(member(j, "rhs", at), at / "rhs");
    return row;
}

inline HPolyhedron hpoly_from_json(const json& j, std::size_t dim, const ioloc::At& at) {
    HPolyhedron p;
    p.dim = dim;
    if (!j.is_object()) at.fail("expected {inequalities, equalities}");
    if (j.contains("inequalities")) {
        const ioloc::At iat = at / "inequalities";
        if (!j["inequalities"].is_array()) iat.fail("expected an array of rows");
        for (std::size_t i = 0; i < j["inequalities"].size(); ++i)
            p.ineqs.push_back(hrow_from_json(j["inequalities"][i], dim, iat / i));
    }
    if (j.contains("equalities")) {
        const ioloc::At eat = at / "equalities";
        if (!j["equalities"].is_array()) eat.fail("expected an array of rows");
        for (std::size_t i = 0; i < j["equalities"].size(); ++i)
            p.eqs.push_back(hrow_from_json(j["equalities"][i], dim, eat / i));
    }
    return p;
}

inline json hpoly_to_json(const HPolyhedron& p) {
    json j;
    json ineqs = json::array();
    for (const auto& r : p.ineqs) {
        json row;
        row["normal"] = print_vec(r.normal);
        row["rhs"] = print_rational(r.rhs);
        ineqs.push_back(std::move(row));
    }
    json eqs = json::array();
    for (const auto& r : p.eqs) {
        json row;
        row["normal"] = print_vec(r.normal);
        row["rhs"] = print_rational(r.rhs);
        eqs.push_back(std::move(row));
    }
    j["inequalities"] = std::move(ineqs);
    j["equalities"] = std::move(eqs);
    return j;
}

inline FGCone fgcone_from_json(const json& j, std::size_t dim, const ioloc::At& at) {
    FGCone c;
    c.dim = dim;
    if (!j.is_object()) at.fail("expected {rays, lines}");
    if (j.contains("rays")) {
        const ioloc::At rat = at / "rays";
        if (!j["rays"].is_array()) rat.fail("expected an array of vectors");
        for (std::size_t i = 0; i < j["rays"].size(); ++i)
            c.rays.push_back(sized_vec_field(j["rays"][i], dim, "ray", rat / i));
    }
    if (j.contains("lines")) {
        const ioloc::At lat = at / "lines";
        if (!j["lines"].is_array()) lat.fail("expected an array of vectors");
        for (std::size_t i = 0; i < j["lines"].size(); ++i)
            c.lines.push_back(sized_vec_field(j["lines"][i], dim, "line", lat / i));
    }
    return c;
}

inline json fgcone_to_json(const FGCone& c) {
    json j;
    json rays = json::array();
    for (const auto& r : c.rays) rays.push_back(print_vec(r));
    json lines = json::array();
    for (const auto& l : c.lines) lines.push_back(print_vec(l));
    j["rays"] = std::move(rays);
    j["lines"] = std::move(lines);
    return j;
}

inline Mat mat_field(const json& j, std::size_t rows, std::size_t cols, const char* what,
                     const ioloc::At& at) {
    if (!j.is_array()) at.fail("expected an array of vectors");
    if (j.size() != rows)
        at.fail(std::string("dimension mismatch: ") + what + " has " +
                std::to_string(j.size()) + " rows, expected " + std::to_string(rows));
    Mat m;
    for (std::size_t i = 0; i < j.size(); ++i)
        m.push_back(sized_vec_field(j[i], cols, what, at / i));
    return m;
}

} // namespace iodetail

inline ParsedFile parse_problem(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw ParseError(std::string("not valid JSON: ") + ex.what());
    }
    JsonLocator locator(text);
    const ioloc::At root{&locator, ""};
    if (!doc.is_object()) root.fail("instance file must be a JSON object");

    using iodetail::member;
    using iodetail::string_field;

    ParsedFile f;
    const std::string kind =
        doc.contains("kind") ? string_field(doc["kind"], root / "kind") : "program";
    if (kind == "program")
        f.kind = FileKind::Program;
    else if (kind == "setvalued")
        f.kind = FileKind::SetValued;
    else if (kind == "ekeland")
        f.kind = FileKind::Ekeland;
    else if (kind == "suite")
        f.kind = FileKind::Suite;
    else
        (root / "kind").fail("unknown file kind '" + kind +
                             "' (use program, setvalued, ekeland, or suite)");

    if (doc.contains("name")) f.name = string_field(doc["name"], root / "name");
    if (doc.contains("provenance"))
        f.provenance = string_field(doc["provenance"], root / "provenance");
    if (doc.contains("expect")) {
        const ioloc::At eat = root / "expect";
        if (!doc["expect"].is_array()) eat.fail("expected an array of {check, status}");
        for (std::size_t i = 0; i < doc["expect"].size(); ++i) {
            const json& ej = doc["expect"][i];
            const ioloc::At iat = eat / i;
            if (!ej.is_object()) iat.fail("expected {check, status}");
            ExpectEntry entry;
            entry.check = string_field(member(ej, "check", iat), iat / "check");
            entry.status = string_field(member(ej, "status", iat), iat / "status");
            if (entry.status != "holds" && entry.status != "fails" &&
                entry.status != "inconclusive")
                (iat / "status")
                    .fail("unknown status '" + entry.status +
                          "' (use holds, fails, or inconclusive)");
            if (ej.contains("details")) entry.details = ej["details"];
            f.expect.push_back(std::move(entry));
        }
    }

    switch (f.kind) {
        case FileKind::Program: {
            const json& vj = member(doc, "variables", root);
            const ioloc::At vat = root / "variables";
            if (!vj.is_array() || vj.empty()) vat.fail("expected a nonempty array of names");
            for (std::size_t i = 0; i < vj.size(); ++i)
                f.variables.push_back(string_field(vj[i], vat / i));
            const std::size_t dim = f.variables.size();
            f.program.dim = dim;
            f.program.objective =
                expr_from_json(member(doc, "objective", root), f.variables, root / "objective");
            if (doc.contains("inequalities")) {
                const ioloc::At iat = root / "inequalities";
                if (!doc["inequalities"].is_array()) iat.fail("expected an array of expressions");
                for (std::size_t i = 0; i < doc["inequalities"].size(); ++i)
                    f.program.ineqs.push_back(
                        expr_from_json(doc["inequalities"][i], f.variables, iat / i));
            }
            if (doc.contains("equalities")) {
                const ioloc::At eat = root / "equalities";
                if (!doc["equalities"].is_array()) eat.fail("expected an array of expressions");
                for (std::size_t i = 0; i < doc["equalities"].size(); ++i)
                    f.program.eqs.push_back(
                        expr_from_json(doc["equalities"][i], f.variables, eat / i));
            }
            f.point = sized_vec_field(member(doc, "point", root), dim, "point", root / "point");
            if (doc.contains("gradients")) {
                const json& gj = doc["gradients"];
                const ioloc::At gat = root / "gradients";
                if (!gj.is_object()) gat.fail("expected {objective, inequalities, equalities}");
                GradientOverrides g;
                g.objective = sized_vec_field(member(gj, "objective", gat), dim,
                                              "objective gradient", gat / "objective");
                if (gj.contains("inequalities"))
                    g.inequalities =
                        iodetail::mat_field(gj["inequalities"], f.program.ineqs.size(), dim,
                                            "inequality gradients", gat / "inequalities");
                else if (!f.program.ineqs.empty())
                    gat.fail("gradient overrides must cover all inequalities");
                if (gj.contains("equalities"))
                    g.equalities =
                        iodetail::mat_field(gj["equalities"], f.program.eqs.size(), dim,
                                            "equality gradients", gat / "equalities");
                else if (!f.program.eqs.empty())
                    gat.fail("gradient overrides must cover all equalities");
                f.gradients = std::move(g);
            }
            if (doc.contains("slater_point"))
                f.slater_point = sized_vec_field(doc["slater_point"], dim, "slater point",
                                                 root / "slater_point");
            if (doc.contains("attach_regularity_probe")) {
                const json& aj = doc["attach_regularity_probe"];
                if (!aj.is_boolean())
                    (root / "attach_regularity_probe").fail("expected true or false");
                f.attach_regularity = aj.get<bool>();
            }
            break;
        }
        case FileKind::SetValued: {
            PolyhedralInstance inst;
            const std::size_t dx = static_cast<std::size_t>(
                iodetail::int_field(member(doc, "dim_x", root), root / "dim_x"));
            const std::size_t dy = static_cast<std::size_t>(
                iodetail::int_field(member(doc, "dim_y", root), root / "dim_y"));
            const std::size_t dz = static_cast<std::size_t>(
                iodetail::int_field(member(doc, "dim_z", root), root / "dim_z"));
            inst.dim_x = dx;
            inst.dim_y = dy;
            inst.dim_z = dz;
            inst.epi = iodetail::hpoly_from_json(member(doc, "epigraph", root), dx + dy + dz,
                                                 root / "epigraph");
            const json& pj = member(doc, "point", root);
            const ioloc::At pat = root / "point";
            if (!pj.is_object()) pat.fail("expected {x, y, z}");
            inst.xstar = sized_vec_field(member(pj, "x", pat), dx, "x*", pat / "x");
            inst.ystar = sized_vec_field(member(pj, "y", pat), dy, "y*", pat / "y");
            inst.zstar = sized_vec_field(member(pj, "z", pat), dz, "z*", pat / "z");
            inst.cone_y = make_ordering_cone(
                iodetail::fgcone_from_json(member(doc, "cone_y", root), dy, root / "cone_y"));
            inst.cone_z = make_ordering_cone(
                iodetail::fgcone_from_json(member(doc, "cone_z", root), dz, root / "cone_z"));
            if (doc.contains("domain"))
                inst.s_hat = iodetail::hpoly_from_json(doc["domain"], dx, root / "domain");
            else
                inst.s_hat.dim = dx;
            f.setvalued = std::move(inst);
            break;
        }
        case FileKind::Ekeland: {
            const json& pj = member(doc, "points", root);
            const ioloc::At pat = root / "points";
            if (!pj.is_array() || pj.empty()) pat.fail("expected a nonempty array of labels");
            FiniteMetricSpace m;
            for (std::size_t i = 0; i < pj.size(); ++i)
                m.points.push_back(string_field(pj[i], pat / i));
            const std::size_t n = m.points.size();
            m.dist = iodetail::mat_field(member(doc, "distances", root), n, n,
                                         "distance matrix", root / "distances");
            f.space = std::move(m);
            f.values = sized_vec_field(member(doc, "values", root), n, "value list",
                                       root / "values");
            const std::string z = string_field(member(doc, "start", root), root / "start");
            bool found = false;
            for (std::size_t i = 0; i < n; ++i)
                if (f.space->points[i] == z) {
                    f.start = i;
                    found = true;
                }
            if (!found) (root / "start").fail("unknown start label '" + z + "'");
            f.epsilon = rational_field(member(doc, "epsilon", root), root / "epsilon");
            if (doc.contains("lambda"))
                f.lambda = rational_field(doc["lambda"], root / "lambda");
            break;
        }
        case FileKind::Suite: {
            f.suite = string_field(member(doc, "suite", root), root / "suite");
            const std::int64_t seed =
                iodetail::int_field(member(doc, "seed", root), root / "seed");
            if (seed < 0) (root / "seed").fail("seed must be nonnegative");
            f.seed = static_cast<std::uint64_t>(seed);
            break;
        }
    }
    return f;
}

inline std::string print_problem(const ParsedFile& f) {
    json doc;
    doc["kind"] = to_string(f.kind);
    if (!f.name.empty()) doc["name"] = f.name;
    if (!f.provenance.empty()) doc["provenance"] = f.provenance;
    if (!f.expect.empty()) {
        json expect = json::array();
        for (const auto& e : f.expect) {
            json ej;
            ej["check"] = e.check;
            ej["status"] = e.status;
            if (!e.details.is_null()) ej["details"] = e.details;
            expect.push_back(std::move(ej));
        }
        doc["expect"] = std::move(expect);
    }
    switch (f.kind) {
        case FileKind::Program: {
            doc["variables"] = f.variables;
            doc["objective"] = expr_to_json(f.program.objective, f.variables);
            json ineqs = json::array();
            for (const auto& g : f.program.ineqs) ineqs.push_back(expr_to_json(g, f.variables));
            doc["inequalities"] = std::move(ineqs);
            json eqs = json::array();
            for (const auto& h : f.program.eqs) eqs.push_back(expr_to_json(h, f.variables));
            doc["equalities"] = std::move(eqs);
            doc["point"] = print_vec(f.point);
            if (f.gradients) {
                json g;
                g["objective"] = print_vec(f.gradients->objective);
                json gi = json::array();
                for (const auto& row : f.gradients->inequalities) gi.push_back(print_vec(row));
                g["inequalities"] = std::move(gi);
                json ge = json::array();
                for (const auto& row : f.gradients->equalities) ge.push_back(print_vec(row));
                g["equalities"] = std::move(ge);
                doc["gradients"] = std::move(g);
            }
            if (f.slater_point) doc["slater_point"] = print_vec(*f.slater_point);
            if (f.attach_regularity) doc["attach_regularity_probe"] = true;
            break;
        }
        case FileKind::SetValued: {
            const PolyhedralInstance& inst = *f.setvalued;
            doc["dim_x"] = inst.dim_x;
            doc["dim_y"] = inst.dim_y;
            doc["dim_z"] = inst.dim_z;
            doc["epigraph"] = iodetail::hpoly_to_json(inst.epi);
            json point;
            point["x"] = print_vec(inst.xstar);
            point["y"] = print_vec(inst.ystar);
            point["z"] = print_vec(inst.zstar);
            doc["point"] = std::move(point);
            doc["cone_y"] = iodetail::fgcone_to_json(inst.cone_y.cone);
            doc["cone_z"] = iodetail::fgcone_to_json(inst.cone_z.cone);
            if (!inst.s_hat.ineqs.empty() || !inst.s_hat.eqs.empty())
                doc["domain"] = iodetail::hpoly_to_json(inst.s_hat);
            break;
        }
        case FileKind::Ekeland: {
            doc["points"] = f.space->points;
            json rows = json::array();
            for (const auto& row : f.space->dist) rows.push_back(print_vec(row));
            doc["distances"] = std::move(rows);
            doc["values"] = print_vec(f.values);
            doc["start"] = f.space->points[f.start];
            doc["epsilon"] = print_rational(f.epsilon);
            doc["lambda"] = print_rational(f.lambda);
            break;
        }
        case FileKind::Suite: {
            doc["suite"] = f.suite;
            doc["seed"] = f.seed;
            break;
        }
    }
    return doc.dump(2) + "\n";
}

inline std::string input_digest(const ParsedFile& f) { return fnv1a64_hex(print_problem(f)); }

inline ParsedFile parse_problem_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open instance file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_problem(buf.str());
    } catch (const ParseError& ex) {
        throw ParseError(path + ": " + ex.what());
    }
}

} // namespace optcert
