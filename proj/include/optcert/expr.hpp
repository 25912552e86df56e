#pragma once

// Expression DSL for the functions under analysis. Arithmetic runs on two
// tracks: exact rationals, and a high-precision float track that a value is
// moved onto permanently once an exp node touches it ("poisoned"). Exact
// values admit exact comparisons; float-track comparisons use a tolerance
// (1e-9 by default, OPTCERT_FLOAT_TOL overrides).
//
// The float track is evaluated in 113-bit binary internally and exposed as
// double: the difference-quotient schedules below go down to t = 2^-40,
// where 53-bit evaluation of exp branches would cancel away every digit.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "optcert/rational.hpp"

namespace optcert {

using Quad = boost::multiprecision::cpp_bin_float_quad;

inline double float_tolerance() {
    static const double tol = [] {
        if (const char* s = std::getenv("OPTCERT_FLOAT_TOL")) {
            try {
                return std::stod(s);
            } catch (...) {
            }
        }
        return 1e-9;
    }();
    return tol;
}

inline Quad to_quad(const Rational& r) {
    return Quad(numerator(r)) / Quad(denominator(r));
}

class Scalar {
public:
    Scalar() : exact_(true), q_(0), r_(0) {}
    Scalar(Rational r) : exact_(true), q_(to_quad(r)), r_(std::move(r)) {}  // NOLINT
    static Scalar approx(Quad q) {
        Scalar s;
        s.exact_ = false;
        s.q_ = std::move(q);
        s.r_ = 0;
        return s;
    }

    bool exact() const { return exact_; }
    const Rational& rat() const {
        if (!exact_) throw Error("exact value required but this path is float-tagged");
        return r_;
    }
    const Quad& quad() const { return q_; }
    double as_double() const { return static_cast<double>(q_); }

    friend Scalar operator+(const Scalar& a, const Scalar& b) {
        if (a.exact_ && b.exact_) return Scalar(a.r_ + b.r_);
        return approx(a.q_ + b.q_);
    }
    friend Scalar operator-(const Scalar& a, const Scalar& b) {
        if (a.exact_ && b.exact_) return Scalar(a.r_ - b.r_);
        return approx(a.q_ - b.q_);
    }
    friend Scalar operator*(const Scalar& a, const Scalar& b) {
        if (a.exact_ && b.exact_) return Scalar(a.r_ * b.r_);
        return approx(a.q_ * b.q_);
    }
    Scalar operator-() const {
        if (exact_) return Scalar(-r_);
        return approx(-q_);
    }

    Scalar reciprocal() const {
        if (exact_) {
            if (r_ == 0) throw UndefinedError("reciprocal of exact zero");
            return Scalar(Rational(1) / r_);
        }
        if (boost::multiprecision::abs(q_) <= Quad(float_tolerance()))
            throw UndefinedError("reciprocal of (near-)zero float value");
        return approx(Quad(1) / q_);
    }

    Scalar pow_int(int k) const {  // k >= 1
        Scalar acc = *this;
        for (int i = 1; i < k; ++i) acc = acc * *this;
        return acc;
    }

    Scalar exp_() const { return approx(boost::multiprecision::exp(q_)); }

    Scalar abs_() const {
        if (exact_) return Scalar(r_ < 0 ? Rational(-r_) : r_);
        return approx(boost::multiprecision::abs(q_));
    }

private:
    bool exact_;
    Quad q_;
    Rational r_;
};

// Three-way comparison; 0 means indistinguishable (exact equality, or within
// the float tolerance when either side is float-tagged).
inline int cmp(const Scalar& a, const Scalar& b) {
    if (a.exact() && b.exact()) {
        if (a.rat() < b.rat()) return -1;
        if (a.rat() > b.rat()) return 1;
        return 0;
    }
    const Quad d = a.quad() - b.quad();
    const Quad tol(float_tolerance());
    if (d > tol) return 1;
    if (d < -tol) return -1;
    return 0;
}

inline int sign_of(const Scalar& s) { return cmp(s, Scalar(Rational(0))); }

// --- expression trees --------------------------------------------------------

enum class ExprKind {
    Constant,
    Variable,
    Sum,
    ScalarMult,
    Product,
    Power,
    Exp,
    Abs,
    Max,
    Min,
    Reciprocal,
    Piecewise,
};

enum class Relation { LE, LT, EQ, GE, GT };

struct LinCond {
    Vec normal;
    Rational rhs;
    Relation rel = Relation::LE;
};

// Conjunction of linear conditions.
struct Guard {
    std::vector<LinCond> conds;
};

class ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct Piece {
    Guard guard;
    Expr value;
};

// Declares that the piecewise function is differentiable at `point` with the
// given gradient, overriding junction detection there. Consumers are
// expected to cross-validate with regularity_probe.
struct JunctionGradient {
    Vec point;
    Vec gradient;
};

class ExprNode {
public:
    ExprKind kind;
    Rational constant;                                // Constant
    std::size_t var_index = 0;                        // Variable
    Rational coeff;                                   // ScalarMult
    int exponent = 0;                                 // Power
    std::vector<Expr> args;                           // Sum/Product/Max/Min and unary ops
    std::vector<Piece> pieces;                        // Piecewise
    std::vector<JunctionGradient> junction_gradients; // Piecewise annotations

    explicit ExprNode(ExprKind k) : kind(k) {}
};

inline Expr constant(Rational c) {
    auto n = std::make_shared<ExprNode>(ExprKind::Constant);
    n->constant = std::move(c);
    return n;
}

inline Expr variable(std::size_t index) {
    auto n = std::make_shared<ExprNode>(ExprKind::Variable);
    n->var_index = index;
    return n;
}

inline Expr sum(std::vector<Expr> args) {
    if (args.empty()) throw InputError("sum: needs at least one term");
    auto n = std::make_shared<ExprNode>(ExprKind::Sum);
    n->args = std::move(args);
    return n;
}

inline Expr scalar_mult(Rational c, Expr e) {
    auto n = std::make_shared<ExprNode>(ExprKind::ScalarMult);
    n->coeff = std::move(c);
    n->args = {std::move(e)};
    return n;
}

inline Expr product(Expr a, Expr b) {
    auto n = std::make_shared<ExprNode>(ExprKind::Product);
    n->args = {std::move(a), std::move(b)};
    return n;
}

inline Expr power(Expr e, int exponent) {
    if (exponent < 1) throw InputError("power: exponent must be a positive integer");
    auto n = std::make_shared<ExprNode>(ExprKind::Power);
    n->exponent = exponent;
    n->args = {std::move(e)};
    return n;
}

inline Expr exp_of(Expr e) {
    auto n = std::make_shared<ExprNode>(ExprKind::Exp);
    n->args = {std::move(e)};
    return n;
}

inline Expr abs_of(Expr e) {
    auto n = std::make_shared<ExprNode>(ExprKind::Abs);
    n->args = {std::move(e)};
    return n;
}

inline Expr max_of(std::vector<Expr> args) {
    if (args.empty()) throw InputError("max: needs at least one branch");
    auto n = std::make_shared<ExprNode>(ExprKind::Max);
    n->args = std::move(args);
    return n;
}

inline Expr min_of(std::vector<Expr> args) {
    if (args.empty()) throw InputError("min: needs at least one branch");
    auto n = std::make_shared<ExprNode>(ExprKind::Min);
    n->args = std::move(args);
    return n;
}

inline Expr reciprocal(Expr e) {
    auto n = std::make_shared<ExprNode>(ExprKind::Reciprocal);
    n->args = {std::move(e)};
    return n;
}

inline Expr piecewise(std::vector<Piece> pieces,
                      std::vector<JunctionGradient> junction_gradients = {}) {
    if (pieces.empty()) throw InputError("piecewise: needs at least one piece");
    auto n = std::make_shared<ExprNode>(ExprKind::Piecewise);
    n->pieces = std::move(pieces);
    n->junction_gradients = std::move(junction_gradients);
    return n;
}

// --- evaluation ---------------------------------------------------------------

inline bool cond_holds(const LinCond& c, const Vec& x) {
    const Rational lhs = dot(c.normal, x);
    switch (c.rel) {
        case Relation::LE: return lhs <= c.rhs;
        case Relation::LT: return lhs < c.rhs;
        case Relation::EQ: return lhs == c.rhs;
        case Relation::GE: return lhs >= c.rhs;
        case Relation::GT: return lhs > c.rhs;
    }
    return false;
}

inline bool guard_holds(const Guard& g, const Vec& x) {
    for (const auto& c : g.conds)
        if (!cond_holds(c, x)) return false;
    return true;
}

// First piece whose guard holds; nullopt when none matches.
inline std::optional<std::size_t> active_piece(const ExprNode& pw, const Vec& x) {
    for (std::size_t i = 0; i < pw.pieces.size(); ++i)
        if (guard_holds(pw.pieces[i].guard, x)) return i;
    return std::nullopt;
}

inline Scalar eval(const Expr& e, const Vec& x) {
    switch (e->kind) {
        case ExprKind::Constant: return Scalar(e->constant);
        case ExprKind::Variable:
            if (e->var_index >= x.size())
                throw InputError("variable index " + std::to_string(e->var_index) +
                                 " out of range for dimension " + std::to_string(x.size()));
            return Scalar(x[e->var_index]);
        case ExprKind::Sum: {
            Scalar s = eval(e->args[0], x);
            for (std::size_t i = 1; i < e->args.size(); ++i) s = s + eval(e->args[i], x);
            return s;
        }
        case ExprKind::ScalarMult: return Scalar(e->coeff) * eval(e->args[0], x);
        case ExprKind::Product: return eval(e->args[0], x) * eval(e->args[1], x);
        case ExprKind::Power: return eval(e->args[0], x).pow_int(e->exponent);
        case ExprKind::Exp: return eval(e->args[0], x).exp_();
        case ExprKind::Abs: return eval(e->args[0], x).abs_();
        case ExprKind::Max: {
            Scalar best = eval(e->args[0], x);
            for (std::size_t i = 1; i < e->args.size(); ++i) {
                Scalar v = eval(e->args[i], x);
                if (cmp(v, best) > 0) best = v;
            }
            return best;
        }
        case ExprKind::Min: {
            Scalar best = eval(e->args[0], x);
            for (std::size_t i = 1; i < e->args.size(); ++i) {
                Scalar v = eval(e->args[i], x);
                if (cmp(v, best) < 0) best = v;
            }
            return best;
        }
        case ExprKind::Reciprocal: return eval(e->args[0], x).reciprocal();
        case ExprKind::Piecewise: {
            auto idx = active_piece(*e, x);
            if (!idx)
                throw UndefinedError("piecewise: no guard matches at " + format_vec(x));
            return eval(e->pieces[*idx].value, x);
        }
    }
    throw Error("eval: unreachable");
}

struct EvalValue {
    bool exact = true;
    Rational value;   // when exact
    double approx = 0;  // always populated
};

inline EvalValue eval_value(const Expr& e, const Vec& x) {
    const Scalar s = eval(e, x);
    EvalValue v;
    v.exact = s.exact();
    if (s.exact()) v.value = s.rat();
    v.approx = s.as_double();
    return v;
}

// --- gradients ----------------------------------------------------------------

namespace detail {

struct ValGrad {
    Scalar val;
    std::vector<Scalar> grad;
};

inline ValGrad val_grad(const Expr& e, const Vec& x);

inline std::vector<Scalar> zero_grad(std::size_t n) {
    return std::vector<Scalar>(n, Scalar(Rational(0)));
}

// True when x lies on the boundary hyperplane of any condition of any piece
// (zero-normal conditions cut no hyperplane and are ignored).
inline bool on_guard_boundary(const ExprNode& pw, const Vec& x) {
    for (const auto& piece : pw.pieces)
        for (const auto& c : piece.guard.conds)
            if (!is_zero(c.normal) && dot(c.normal, x) == c.rhs) return true;
    return false;
}

inline ValGrad val_grad(const Expr& e, const Vec& x) {
    const std::size_t n = x.size();
    switch (e->kind) {
        case ExprKind::Constant: return {Scalar(e->constant), zero_grad(n)};
        case ExprKind::Variable: {
            if (e->var_index >= n) throw InputError("variable index out of range");
            auto g = zero_grad(n);
            g[e->var_index] = Scalar(Rational(1));
            return {Scalar(x[e->var_index]), std::move(g)};
        }
        case ExprKind::Sum: {
            ValGrad acc = val_grad(e->args[0], x);
            for (std::size_t i = 1; i < e->args.size(); ++i) {
                ValGrad t = val_grad(e->args[i], x);
                acc.val = acc.val + t.val;
                for (std::size_t k = 0; k < n; ++k) acc.grad[k] = acc.grad[k] + t.grad[k];
            }
            return acc;
        }
        case ExprKind::ScalarMult: {
            ValGrad t = val_grad(e->args[0], x);
            const Scalar c{e->coeff};
            for (auto& g : t.grad) g = c * g;
            t.val = c * t.val;
            return t;
        }
        case ExprKind::Product: {
            ValGrad a = val_grad(e->args[0], x);
            ValGrad b = val_grad(e->args[1], x);
            std::vector<Scalar> g(n);
            for (std::size_t k = 0; k < n; ++k) g[k] = a.val * b.grad[k] + b.val * a.grad[k];
            return {a.val * b.val, std::move(g)};
        }
        case ExprKind::Power: {
            ValGrad t = val_grad(e->args[0], x);
            const int k = e->exponent;
            Scalar factor{Rational(k)};
            if (k >= 2) factor = factor * t.val.pow_int(k - 1);
            for (auto& g : t.grad) g = factor * g;
            t.val = t.val.pow_int(k);
            return t;
        }
        case ExprKind::Exp: {
            ValGrad t = val_grad(e->args[0], x);
            const Scalar v = t.val.exp_();
            for (auto& g : t.grad) g = v * g;
            t.val = v;
            return t;
        }
        case ExprKind::Reciprocal: {
            ValGrad t = val_grad(e->args[0], x);
            const Scalar inv = t.val.reciprocal();
            const Scalar factor = -(inv * inv);
            for (auto& g : t.grad) g = factor * g;
            t.val = inv;
            return t;
        }
        case ExprKind::Abs: {
            ValGrad t = val_grad(e->args[0], x);
            const int s = sign_of(t.val);
            if (s == 0)
                throw NonsmoothError("abs: argument vanishes at " + format_vec(x) +
                                     " (kink)");
            if (s < 0)
                for (auto& g : t.grad) g = -g;
            t.val = t.val.abs_();
            return t;
        }
        case ExprKind::Max:
        case ExprKind::Min: {
            const bool is_max = e->kind == ExprKind::Max;
            std::vector<ValGrad> branches;
            branches.reserve(e->args.size());
            for (const auto& a : e->args) branches.push_back(val_grad(a, x));
            std::size_t best = 0;
            bool tie = false;
            for (std::size_t i = 1; i < branches.size(); ++i) {
                const int c = cmp(branches[i].val, branches[best].val);
                if (c == 0) {
                    tie = true;
                } else if ((is_max && c > 0) || (!is_max && c < 0)) {
                    best = i;
                    tie = false;
                }
            }
            if (tie)
                throw NonsmoothError(std::string(is_max ? "max" : "min") +
                                     ": active branches tie at " + format_vec(x) + " (kink)");
            return std::move(branches[best]);
        }
        case ExprKind::Piecewise: {
            if (on_guard_boundary(*e, x)) {
                for (const auto& jg : e->junction_gradients) {
                    if (jg.point == x) {
                        std::vector<Scalar> g;
                        g.reserve(jg.gradient.size());
                        for (const auto& q : jg.gradient) g.emplace_back(q);
                        Scalar v = eval(e, x);
                        return {std::move(v), std::move(g)};
                    }
                }
                throw NonsmoothError("piecewise: " + format_vec(x) +
                                     " lies on a guard boundary and no junction gradient is "
                                     "declared there");
            }
            auto idx = active_piece(*e, x);
            if (!idx) throw UndefinedError("piecewise: no guard matches at " + format_vec(x));
            return val_grad(e->pieces[*idx].value, x);
        }
    }
    throw Error("val_grad: unreachable");
}

} // namespace detail

// Gradient on the scalar tracks; throws NonsmoothError at kinks/junctions
// without annotations.
inline std::vector<Scalar> gradient_scalars(const Expr& e, const Vec& x) {
    return detail::val_grad(e, x).grad;
}

struct GradientValue {
    bool exact = true;
    Vec grad;                    // when exact
    std::vector<double> approx;  // always populated
};

inline GradientValue gradient(const Expr& e, const Vec& x) {
    auto gs = gradient_scalars(e, x);
    GradientValue out;
    out.approx.reserve(gs.size());
    for (const auto& s : gs) {
        out.exact = out.exact && s.exact();
        out.approx.push_back(s.as_double());
    }
    if (out.exact) {
        out.grad.reserve(gs.size());
        for (const auto& s : gs) out.grad.push_back(s.rat());
    }
    return out;
}

// Exact gradient or an error: callers on the certificate path must not see
// float-tagged components.
inline Vec exact_gradient(const Expr& e, const Vec& x) {
    auto g = gradient(e, x);
    if (!g.exact) throw Error("gradient is float-tagged at " + format_vec(x) +
                              "; exact arithmetic required on this path");
    return g.grad;
}

// --- structural queries ---------------------------------------------------

// Affine recognition: returns (g, c) with e(x) = <g, x> + c. Products are
// affine only when one factor is a constant subtree.
inline std::optional<std::pair<Vec, Rational>> as_affine(const Expr& e, std::size_t dim);

namespace detail {
inline std::optional<Rational> as_constant(const Expr& e) {
    switch (e->kind) {
        case ExprKind::Constant: return e->constant;
        case ExprKind::Sum: {
            Rational s = 0;
            for (const auto& a : e->args) {
                auto c = as_constant(a);
                if (!c) return std::nullopt;
                s += *c;
            }
            return s;
        }
        case ExprKind::ScalarMult: {
            auto c = as_constant(e->args[0]);
            if (!c) return std::nullopt;
            return e->coeff * *c;
        }
        case ExprKind::Product: {
            auto a = as_constant(e->args[0]), b = as_constant(e->args[1]);
            if (!a || !b) return std::nullopt;
            return *a * *b;
        }
        case ExprKind::Power: {
            auto c = as_constant(e->args[0]);
            if (!c) return std::nullopt;
            Rational acc = *c;
            for (int i = 1; i < e->exponent; ++i) acc *= *c;
            return acc;
        }
        default: return std::nullopt;
    }
}
} // namespace detail

inline std::optional<std::pair<Vec, Rational>> as_affine(const Expr& e, std::size_t dim) {
    switch (e->kind) {
        case ExprKind::Constant: return std::make_pair(vzero(dim), e->constant);
        case ExprKind::Variable: {
            if (e->var_index >= dim) return std::nullopt;
            Vec g = vzero(dim);
            g[e->var_index] = 1;
            return std::make_pair(std::move(g), Rational(0));
        }
        case ExprKind::Sum: {
            Vec g = vzero(dim);
            Rational c = 0;
            for (const auto& a : e->args) {
                auto t = as_affine(a, dim);
                if (!t) return std::nullopt;
                g = vadd(g, t->first);
                c += t->second;
            }
            return std::make_pair(std::move(g), std::move(c));
        }
        case ExprKind::ScalarMult: {
            auto t = as_affine(e->args[0], dim);
            if (!t) return std::nullopt;
            return std::make_pair(vscale(e->coeff, t->first), e->coeff * t->second);
        }
        case ExprKind::Product: {
            auto ca = detail::as_constant(e->args[0]);
            if (ca) {
                auto t = as_affine(e->args[1], dim);
                if (!t) return std::nullopt;
                return std::make_pair(vscale(*ca, t->first), *ca * t->second);
            }
            auto cb = detail::as_constant(e->args[1]);
            if (cb) {
                auto t = as_affine(e->args[0], dim);
                if (!t) return std::nullopt;
                return std::make_pair(vscale(*cb, t->first), *cb * t->second);
            }
            return std::nullopt;
        }
        case ExprKind::Power:
            if (auto c = detail::as_constant(e)) return std::make_pair(vzero(dim), *c);
            return std::nullopt;
        default: return std::nullopt;
    }
}

// True for expressions built without abs/max/min/piecewise (differentiable
// wherever defined).
inline bool is_smooth_fragment(const Expr& e) {
    switch (e->kind) {
        case ExprKind::Abs:
        case ExprKind::Max:
        case ExprKind::Min:
        case ExprKind::Piecewise: return false;
        default:
            for (const auto& a : e->args)
                if (!is_smooth_fragment(a)) return false;
            return true;
    }
}

// --- numeric probes -------------------------------------------------------

struct DirDeriv {
    double estimate = 0;   // last difference quotient, t = 2^-40
    double stability = 0;  // spread of the quotients over the final 8 steps
};

// One-sided difference quotients along t = 2^-k, k = 10..40. Evaluation is
// exact on the rational track, so the quotient suffers no cancellation; the
// float track runs in 113-bit precision.
inline DirDeriv directional_derivative_numeric(const Expr& e, const Vec& x, const Vec& d) {
    require_dim(d, x.size(), "direction");
    const Scalar f0 = eval(e, x);
    std::vector<Quad> quotients;
    for (int k = 10; k <= 40; ++k) {
        const Rational t(Int(1), Int(1) << k);
        const Scalar ft = eval(e, vadd(x, vscale(t, d)));
        quotients.push_back((ft - f0).quad() / to_quad(t));
    }
    DirDeriv out;
    out.estimate = static_cast<double>(quotients.back());
    Quad lo = quotients.back(), hi = quotients.back();
    for (std::size_t i = quotients.size() - 8; i < quotients.size(); ++i) {
        if (quotients[i] < lo) lo = quotients[i];
        if (quotients[i] > hi) hi = quotients[i];
    }
    out.stability = static_cast<double>(hi - lo);
    return out;
}

struct DiscontinuityWitness {
    int scale_k = 0;  // witness lies at distance 2^-k from the base point
    Vec point;
    double jump = 0;  // observed two-sided gap at the witness
};

struct RegularityReport {
    bool continuous_at_x = true;
    bool discontinuity_in_every_ball = false;
    std::vector<DiscontinuityWitness> witnesses;
    std::vector<double> fitted_gradient;
    std::vector<double> remainder_ratios;  // per probe radius
    bool frechet_ok = false;
};

namespace detail {

inline void collect_boundary_planes(const Expr& e, const Vec& x,
                                    std::vector<const ExprNode*>& nodes) {
    if (e->kind == ExprKind::Piecewise) nodes.push_back(e.get());
    for (const auto& a : e->args) collect_boundary_planes(a, x, nodes);
    for (const auto& p : e->pieces) collect_boundary_planes(p.value, x, nodes);
}

// Rational basis of the hyperplane {w : <n, w> = 0}.
inline std::vector<Vec> hyperplane_basis(const Vec& n) {
    const std::size_t d = n.size();
    std::size_t pivot = 0;
    while (pivot < d && n[pivot] == 0) ++pivot;
    std::vector<Vec> basis;
    for (std::size_t j = 0; j < d; ++j) {
        if (j == pivot) continue;
        Vec w = vzero(d);
        w[j] = 1;
        if (pivot < d && n[j] != 0) w[pivot] = -n[j] / n[pivot];
        basis.push_back(std::move(w));
    }
    return basis;
}

inline Guard closure_of(const Guard& g) {
    Guard c = g;
    for (auto& cond : c.conds) {
        if (cond.rel == Relation::LT) cond.rel = Relation::LE;
        if (cond.rel == Relation::GT) cond.rel = Relation::GE;
    }
    return c;
}

// Largest disagreement at p between pieces whose guard closures contain p;
// nullopt when fewer than two pieces reach p or a branch fails to evaluate.
inline std::optional<Scalar> branch_gap(const ExprNode& pw, const Vec& p) {
    std::vector<Scalar> vals;
    for (const auto& piece : pw.pieces) {
        if (!guard_holds(closure_of(piece.guard), p)) continue;
        try {
            vals.push_back(eval(piece.value, p));
        } catch (const Error&) {
        }
    }
    if (vals.size() < 2) return std::nullopt;
    std::optional<Scalar> best;
    for (std::size_t i = 0; i < vals.size(); ++i)
        for (std::size_t j = i + 1; j < vals.size(); ++j) {
            Scalar gap = (vals[i] - vals[j]).abs_();
            if (!best || cmp(gap, *best) > 0) best = gap;
        }
    return best;
}

inline bool jump_nonzero(const Scalar& j) {
    if (j.exact()) return j.rat() > 0;
    return j.quad() > Quad("1e-25");  // far above 113-bit noise, far below real jumps
}

} // namespace detail

// Continuity and Frechet-differentiability probe at x. Everything here is
// numeric evidence, not certificate arithmetic — except the discontinuity
// witnesses, whose branch gaps are exact on the rational track.
inline RegularityReport regularity_probe(const Expr& e, const Vec& x) {
    const std::size_t n = x.size();
    RegularityReport rep;

    // Direction set: +-basis plus a few fixed skew directions.
    std::vector<Vec> dirs;
    for (std::size_t i = 0; i < n; ++i) {
        Vec ei = vzero(n);
        ei[i] = 1;
        dirs.push_back(ei);
        dirs.push_back(vneg(ei));
    }
    {
        Vec ones(n, Rational(1));
        Vec alt(n), ramp(n), skew(n);
        for (std::size_t i = 0; i < n; ++i) {
            alt[i] = (i % 2 == 0) ? 1 : -1;
            ramp[i] = Rational(static_cast<int>(i) + 1, static_cast<int>(n));
            skew[i] = Rational(1, static_cast<int>(i) + 2);
        }
        dirs.push_back(ones);
        dirs.push_back(alt);
        dirs.push_back(ramp);
        dirs.push_back(skew);
    }

    // -- continuity at x ------------------------------------------------
    const Scalar f0 = eval(e, x);
    const Quad scale_bound =
        std::max(Quad(1), boost::multiprecision::abs(f0.quad())) * 32;
    bool cont = true;
    for (int k = 18; k <= 20; ++k) {
        const Rational r(Int(1), Int(1) << k);
        for (const auto& w : dirs) {
            const Rational ws = sup_norm(w);
            if (ws == 0) continue;
            try {
                const Scalar fv = eval(e, vadd(x, vscale(r / ws, w)));
                if ((fv - f0).abs_().quad() > scale_bound * to_quad(r)) cont = false;
            } catch (const Error&) {
            }
        }
    }
    rep.continuous_at_x = cont;

    // -- discontinuity witnesses in shrinking balls ----------------------
    // Sample each guard hyperplane through x at distance 2^-k; a candidate
    // jump between guard-closure branches is confirmed at the function level
    // by straddling the plane at distance eta << jump. All distinct
    // confirmed witnesses are recorded (capped per radius).
    std::vector<const ExprNode*> pw_nodes;
    detail::collect_boundary_planes(e, x, pw_nodes);
    int radii_with_witness = 0;
    for (int k = 2; k <= 20; ++k) {
        const Rational r(Int(1), Int(1) << k);
        bool found = false;
        std::vector<Vec> seen;
        for (const ExprNode* pw : pw_nodes) {
            for (const auto& piece : pw->pieces) {
                for (const auto& cond : piece.guard.conds) {
                    if (is_zero(cond.normal) || dot(cond.normal, x) != cond.rhs) continue;
                    for (const auto& w : detail::hyperplane_basis(cond.normal)) {
                        for (const int s : {1, -1}) {
                            const Rational wn = sup_norm(w);
                            if (wn == 0) continue;
                            const Vec p = vadd(x, vscale(Rational(s) * r / wn, w));
                            if (std::find(seen.begin(), seen.end(), p) != seen.end())
                                continue;
                            auto gap = detail::branch_gap(*pw, p);
                            if (!gap || !detail::jump_nonzero(*gap)) continue;
                            const Rational eta = r * r / 64;
                            try {
                                const Scalar hi = eval(e, vadd(p, vscale(eta, cond.normal)));
                                const Scalar lo = eval(e, vsub(p, vscale(eta, cond.normal)));
                                const Scalar observed = (hi - lo).abs_();
                                const Scalar half = *gap * Scalar(Rational(1, 2));
                                if (cmp(observed, half) >= 0) {
                                    found = true;
                                    seen.push_back(p);
                                    if (seen.size() <= 8)
                                        rep.witnesses.push_back({k, p, observed.as_double()});
                                }
                            } catch (const Error&) {
                            }
                        }
                    }
                }
            }
        }
        if (found) ++radii_with_witness;
    }
    rep.discontinuity_in_every_ball = (radii_with_witness == 19);

    // -- Frechet probe ----------------------------------------------------
    // Fit a linear map to the directional quotients, then test the
    // remainder ratio |f(x+h) - f(x) - <g,h>| / |h| on shrinking h.
    std::vector<Vec> fit_dirs(dirs.begin(), dirs.begin() + std::min(dirs.size(), 2 * n + 4));
    std::vector<double> rhs_acc(n, 0.0);
    std::vector<std::vector<double>> gram(n, std::vector<double>(n, 0.0));
    bool fit_ok = true;
    for (const auto& d : fit_dirs) {
        try {
            const DirDeriv dd = directional_derivative_numeric(e, x, d);
            for (std::size_t i = 0; i < n; ++i) {
                const double di = static_cast<double>(d[i]);
                rhs_acc[i] += dd.estimate * di;
                for (std::size_t j = 0; j < n; ++j)
                    gram[i][j] += di * static_cast<double>(d[j]);
            }
        } catch (const Error&) {
            fit_ok = false;
        }
    }
    std::vector<double> g(n, 0.0);
    if (fit_ok) {
        // Small dense solve; the +-basis directions make the Gram matrix
        // strictly diagonally dominant.
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t p = c;
            for (std::size_t i = c + 1; i < n; ++i)
                if (std::abs(gram[i][c]) > std::abs(gram[p][c])) p = i;
            std::swap(gram[p], gram[c]);
            std::swap(rhs_acc[p], rhs_acc[c]);
            if (gram[c][c] == 0) {
                fit_ok = false;
                break;
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (i == c) continue;
                const double f = gram[i][c] / gram[c][c];
                for (std::size_t j = c; j < n; ++j) gram[i][j] -= f * gram[c][j];
                rhs_acc[i] -= f * rhs_acc[c];
            }
        }
        if (fit_ok)
            for (std::size_t i = 0; i < n; ++i) g[i] = rhs_acc[i] / gram[i][i];
    }
    rep.fitted_gradient = g;

    if (fit_ok) {
        bool ok = true;
        std::uint64_t state = 0x9e3779b97f4a7c15ull;  // fixed probe seed
        auto next_unit = [&state](std::size_t dim) {
            Vec u(dim);
            for (auto& c : u) {
                state = state * 6364136223846793005ull + 1442695040888963407ull;
                c = Rational(static_cast<int>((state >> 33) % 2001) - 1000, 1000);
            }
            return u;
        };
        for (int k = 6; k <= 20; ++k) {
            const Rational r(Int(1), Int(1) << k);
            double worst = 0;
            for (int s = 0; s < 3; ++s) {
                Vec u = next_unit(n);
                const Rational un = sup_norm(u);
                if (un == 0) continue;
                const Vec h = vscale(r / un, u);
                try {
                    const Scalar fh = eval(e, vadd(x, h));
                    Quad lin = 0;
                    for (std::size_t i = 0; i < n; ++i) lin += Quad(g[i]) * to_quad(h[i]);
                    const Quad rem =
                        boost::multiprecision::abs((fh - f0).quad() - lin) / to_quad(r);
                    worst = std::max(worst, static_cast<double>(rem));
                } catch (const Error&) {
                }
            }
            rep.remainder_ratios.push_back(worst);
            if (k >= 17 && worst > 1e-4) ok = false;
        }
        rep.frechet_ok = ok;
    }
    return rep;
}

} // namespace optcert
