#pragma once

// Shared shapes for multiplier certificates. A certificate either exhibits
// multipliers (status Holds, with witnesses that the caller can re-verify by
// exact arithmetic), refutes their existence (Fails, with a separating
// functional when one is available), or declines to decide (Inconclusive,
// e.g. when the underlying sets are over-approximations).

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "optcert/expr.hpp"
#include "optcert/rational.hpp"

namespace optcert {

enum class CertStatus { Holds, Fails, Inconclusive };

inline const char* to_string(CertStatus s) {
    switch (s) {
        case CertStatus::Holds: return "holds";
        case CertStatus::Fails: return "fails";
        case CertStatus::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct Certificate {
    CertStatus status = CertStatus::Inconclusive;
    // lambda[0] pairs with the objective, lambda[i] with inequality i.
    Vec lambda;
    // One per equality constraint, unrestricted in sign.
    Vec mu;
    // (set index, chosen subgradient): index 0 = objective, 1..m = inequality
    // i, m+j = equality j. Only sets with nonzero multiplier appear.
    std::vector<std::pair<std::size_t, Vec>> witnesses;
    // Separating functional y with <y, v> <= -1 for every candidate
    // subgradient v, when the multiplier search failed outright.
    std::optional<Vec> refutation;
    std::string normalization;
};

// An optimization problem fixed at a query point: minimize objective subject
// to ineqs[i] <= 0 and eqs[j] = 0.
struct Program {
    std::size_t dim = 0;
    Expr objective;
    std::vector<Expr> ineqs;
    std::vector<Expr> eqs;
};

} // namespace optcert
