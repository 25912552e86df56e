#pragma once

// Constructive variational principle on a finite metric space: starting from
// a point z whose value is within eps of the minimum, iterate exact argmins
// over the shrinking candidate sets S_i = {x : f(x) + (eps/lambda) d(x, z_i)
// <= f(z_i)} until the set collapses to its center. The final point y
// satisfies, exactly: (i) d(z,y) <= lambda, (ii) f(y) + (eps/lambda) d(z,y)
// <= f(z), (iii) f(x) + (eps/lambda) d(x,y) >= f(y) for every x.
//
// Every quantity is rational, so all three conclusions are checked as exact
// inequalities rather than estimated.

#include <cstddef>
#include <string>
#include <vector>

#include "optcert/rational.hpp"

namespace optcert {

struct FiniteMetricSpace {
    std::vector<std::string> points;  // labels, parallel to dist
    Mat dist;
};

inline FiniteMetricSpace metric_space_from_matrix(Mat dist) {
    FiniteMetricSpace m;
    m.points.reserve(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) m.points.push_back("p" + std::to_string(i));
    m.dist = std::move(dist);
    return m;
}

inline void validate_metric_space(const FiniteMetricSpace& m) {
    const std::size_t n = m.dist.size();
    if (m.points.size() != n)
        throw InputError("metric space: " + std::to_string(m.points.size()) +
                         " labels for " + std::to_string(n) + " rows");
    for (std::size_t i = 0; i < n; ++i)
        if (m.dist[i].size() != n)
            throw InputError("metric space: row " + std::to_string(i) + " is not length " +
                             std::to_string(n));
    for (std::size_t i = 0; i < n; ++i)
        if (m.dist[i][i] != 0)
            throw InputError("metric space: nonzero diagonal (" + std::to_string(i) + ")");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (m.dist[i][j] != m.dist[j][i])
                throw InputError("metric space: asymmetric (" + std::to_string(i) + "," +
                                 std::to_string(j) + ")");
            if (m.dist[i][j] <= 0)
                throw InputError("metric space: nonpositive distance (" + std::to_string(i) +
                                 "," + std::to_string(j) + ")");
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                if (m.dist[i][j] > m.dist[i][k] + m.dist[k][j])
                    throw InputError("metric space: triangle (" + std::to_string(i) + "," +
                                     std::to_string(j) + ") via " + std::to_string(k) + ": " +
                                     format_rational(m.dist[i][j]) + " > " +
                                     format_rational(m.dist[i][k]) + " + " +
                                     format_rational(m.dist[k][j]));
}

struct EkelandIterate {
    std::size_t z = 0;
    std::vector<std::size_t> members;  // S_i, ascending indices
};

struct EkelandResult {
    std::size_t y = 0;
    std::string y_label;
    std::vector<EkelandIterate> iterates;
    bool check_i = false;
    bool check_ii = false;
    bool check_iii = false;
};

inline EkelandResult ekeland_point(const FiniteMetricSpace& m, const Vec& f, std::size_t z,
                                   const Rational& eps, const Rational& lambda = 1) {
    validate_metric_space(m);
    const std::size_t n = m.dist.size();
    require_dim(f, n, "objective values");
    if (z >= n) throw InputError("ekeland: start index out of range");
    if (eps <= 0) throw InputError("ekeland: eps must be positive");
    if (lambda <= 0) throw InputError("ekeland: lambda must be positive");

    Rational fmin = f[0];
    for (const auto& v : f)
        if (v < fmin) fmin = v;
    if (!(f[z] < fmin + eps))
        throw PreconditionError("ekeland: hypothesis f(z) < min f + eps fails: " +
                                format_rational(f[z]) + " >= " + format_rational(fmin) +
                                " + " + format_rational(eps));

    const Rational kappa = eps / lambda;
    EkelandResult res;
    std::size_t cur = z;
    for (;;) {
        EkelandIterate it;
        it.z = cur;
        for (std::size_t x = 0; x < n; ++x)
            if (f[x] + kappa * m.dist[x][cur] <= f[cur]) it.members.push_back(x);
        // exact argmin over S_i, lowest index on ties
        std::size_t best = it.members.front();
        for (const std::size_t x : it.members)
            if (f[x] < f[best]) best = x;
        res.iterates.push_back(std::move(it));
        if (best == cur) break;  // S_i = {cur}: no strictly better point remains
        cur = best;
    }
    res.y = cur;
    res.y_label = m.points[cur];
    res.check_i = m.dist[z][cur] <= lambda;
    res.check_ii = f[cur] + kappa * m.dist[z][cur] <= f[z];
    res.check_iii = true;
    for (std::size_t x = 0; x < n; ++x)
        if (f[x] + kappa * m.dist[x][cur] < f[cur]) res.check_iii = false;
    return res;
}

} // namespace optcert
