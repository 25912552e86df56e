#pragma once

// Exact rational scalars, vectors and matrices. Everything downstream
// (polytopes, subdifferentials, multiplier searches) is built on these;
// no floating point is allowed to leak into certificate arithmetic.

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <vector>

#include "optcert/errors.hpp"

namespace optcert {

using Int = boost::multiprecision::cpp_int;

// Stored in lowest terms with positive denominator (maintained by the
// backend on every operation).
using Rational = boost::multiprecision::cpp_rational;

using Vec = std::vector<Rational>;
using Mat = std::vector<Vec>;

inline Int numerator(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Int denominator(const Rational& q) { return boost::multiprecision::denominator(q); }

// Accepts "p", "-p", "p/q" with arbitrary-precision integer parts. Floats
// and anything else are rejected.
inline Rational parse_rational(const std::string& text) {
    auto is_int = [](const std::string& s) {
        if (s.empty()) return false;
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (s[i] < '0' || s[i] > '9') return false;
        return true;
    };
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            if (!is_int(text)) throw InputError("not an integer: '" + text + "'");
            return Rational(Int(text));
        }
        const std::string num = text.substr(0, slash);
        const std::string den = text.substr(slash + 1);
        if (!is_int(num) || !is_int(den))
            throw InputError("not a rational: '" + text + "'");
        Int d(den);
        if (d == 0) throw InputError("zero denominator: '" + text + "'");
        return Rational(Int(num), d);
    } catch (const std::exception& e) {
        throw InputError("cannot parse rational '" + text + "': " + e.what());
    }
}

inline std::string format_rational(const Rational& q) {
    if (denominator(q) == 1) return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

inline std::string format_vec(const Vec& v) {
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_rational(v[i]);
    }
    return out + ")";
}

inline void require_dim(const Vec& v, std::size_t dim, const char* what) {
    if (v.size() != dim)
        throw InputError(std::string(what) + ": expected dimension " + std::to_string(dim) +
                         ", got " + std::to_string(v.size()));
}

inline Rational dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw InputError("dot: dimension mismatch");
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vec vadd(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw InputError("vadd: dimension mismatch");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec vsub(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw InputError("vsub: dimension mismatch");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec vscale(const Rational& c, const Vec& a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

inline Vec vneg(const Vec& a) { return vscale(Rational(-1), a); }

inline Vec vzero(std::size_t n) { return Vec(n, Rational(0)); }

inline bool is_zero(const Vec& a) {
    for (const auto& x : a)
        if (x != 0) return false;
    return true;
}

inline Rational norm_sq(const Vec& a) { return dot(a, a); }

inline Rational sup_norm(const Vec& a) {
    Rational m = 0;
    for (const auto& x : a) {
        Rational ax = x < 0 ? Rational(-x) : x;
        if (ax > m) m = ax;
    }
    return m;
}

// Exact rank. Rows are scaled to integers, then eliminated fraction-free
// (Bareiss): every division below is exact over the integers.
inline int matrix_rank(const Mat& m) {
    if (m.empty()) return 0;
    const std::size_t rows = m.size(), cols = m[0].size();
    if (cols == 0) return 0;
    std::vector<std::vector<Int>> a(rows, std::vector<Int>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (m[i].size() != cols) throw InputError("matrix_rank: ragged matrix");
        Int l = 1;
        for (const auto& q : m[i]) l = boost::multiprecision::lcm(l, denominator(q));
        for (std::size_t j = 0; j < cols; ++j)
            a[i][j] = numerator(m[i][j]) * (l / denominator(m[i][j]));
    }
    Int prev = 1;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && a[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(a[p], a[r]);
        for (std::size_t i = r + 1; i < rows; ++i) {
            for (std::size_t j = c + 1; j < cols; ++j)
                a[i][j] = (a[r][c] * a[i][j] - a[i][c] * a[r][j]) / prev;
            a[i][c] = 0;
        }
        prev = a[r][c];
        ++r;
    }
    return static_cast<int>(r);
}

inline Mat transpose(const Mat& m) {
    if (m.empty()) return {};
    Mat t(m[0].size(), Vec(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i].size() != m[0].size()) throw InputError("transpose: ragged matrix");
        for (std::size_t j = 0; j < m[i].size(); ++j) t[j][i] = m[i][j];
    }
    return t;
}

} // namespace optcert
