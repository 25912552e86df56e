#pragma once

// The two piecewise constraint functions used throughout the regression
// corpus: equality-constrained programs whose unique minimizer admits no
// Lagrange multiplier, because the constraint is Frechet differentiable at
// the solution yet discontinuous in every neighborhood of it.

#include "optcert/expr.hpp"

namespace exfn {

using namespace optcert;

// f0(x,y) = x
inline Expr ex1_f0() { return variable(0); }

// f1(x,y) = y            if x >= 0
//           y - x^2      if x < 0, y <= 0
//           y + x^2      if x < 0, y > 0
// Differentiable at the origin with gradient (0,1), declared as an
// annotation because the origin sits on the guard boundary x = 0.
inline Expr ex1_f1() {
    const Vec ex{Rational(1), Rational(0)};
    const Vec ey{Rational(0), Rational(1)};
    Piece p1{Guard{{LinCond{ex, 0, Relation::GE}}}, variable(1)};
    Piece p2{Guard{{LinCond{ex, 0, Relation::LT}, LinCond{ey, 0, Relation::LE}}},
             sum({variable(1), scalar_mult(Rational(-1), power(variable(0), 2))})};
    Piece p3{Guard{{LinCond{ex, 0, Relation::LT}, LinCond{ey, 0, Relation::GT}}},
             sum({variable(1), power(variable(0), 2)})};
    JunctionGradient at_origin{{Rational(0), Rational(0)}, {Rational(0), Rational(1)}};
    return piecewise({p1, p2, p3}, {at_origin});
}

// f0(x,y) = y
inline Expr ex2_f0() { return variable(1); }

// f1(x,y) = x                if y >= 0
//           e^x + y^2 - 1    if y < 0, x >= 0
//           e^x - y^2 - 1    if y < 0, x < 0
// Differentiable at the origin with gradient (1,0).
inline Expr ex2_f1() {
    const Vec ex{Rational(1), Rational(0)};
    const Vec ey{Rational(0), Rational(1)};
    Piece p1{Guard{{LinCond{ey, 0, Relation::GE}}}, variable(0)};
    Piece p2{Guard{{LinCond{ey, 0, Relation::LT}, LinCond{ex, 0, Relation::GE}}},
             sum({exp_of(variable(0)), power(variable(1), 2), constant(-1)})};
    Piece p3{Guard{{LinCond{ey, 0, Relation::LT}, LinCond{ex, 0, Relation::LT}}},
             sum({exp_of(variable(0)), scalar_mult(Rational(-1), power(variable(1), 2)),
                  constant(-1)})};
    JunctionGradient at_origin{{Rational(0), Rational(0)}, {Rational(1), Rational(0)}};
    return piecewise({p1, p2, p3}, {at_origin});
}

} // namespace exfn
