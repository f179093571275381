#pragma once

#include <cmath>
#include <numbers>

#include "bellman/boundary_function.hpp"

namespace fx {

using bellman::BoundaryFunction;
using bellman::inf;
using bellman::Piece;

inline BoundaryFunction exp_fn(double eps_inf = 0.99) {
    Piece p;
    p.exps = {{1, 1}};
    return BoundaryFunction({p}, eps_inf);
}

// f''' = s (t^3 - 3t + c)
inline BoundaryFunction sextic(double s = 1, double c = 0) {
    Piece p;
    p.poly = {0, 0, 0, s * c / 6, -s / 8, 0, s / 120};
    return BoundaryFunction({p}, inf);
}

// f''' = -s (t - c)
inline BoundaryFunction quartic(double s = 1, double c = 0) {
    Piece p;
    double k = -s / 24;
    p.poly = {k * c * c * c * c, -4 * k * c * c * c, 6 * k * c * c, -4 * k * c, k};
    return BoundaryFunction({p}, inf);
}

// f = t^5 - 10 d t^3
inline BoundaryFunction quintic(double d = 1) {
    Piece p;
    p.poly = {0, 0, 0, -10 * d, 0, 1};
    return BoundaryFunction({p}, inf);
}

inline BoundaryFunction quadratic() {
    Piece p;
    p.poly = {0.3, -0.7, 1.0};
    return BoundaryFunction({p}, inf);
}

// f = -(|t|-1)^3 outside [-1,1], zero inside
inline BoundaryFunction solid_root_cubic() {
    Piece l{-inf, -1, {1, 3, 3, 1}, {}, {}};
    Piece m{-1, 1, {0}, {}, {}};
    Piece r{1, inf, {1, -3, 3, -1}, {}, {}};
    return BoundaryFunction({l, m, r}, inf);
}

// f = -cos t on [-a, a], extended linearly
inline BoundaryFunction sine_monster(double a = 1.5 * std::numbers::pi) {
    double fa = -std::cos(a), fa1 = std::sin(a), fl1 = std::sin(-a);
    Piece l{-inf, -a, {fa + fl1 * a, fl1}, {}, {}};
    Piece m{-a, a, {}, {}, {{-1, 1, 0}}};
    Piece r{a, inf, {fa - fa1 * a, fa1}, {}, {}};
    return BoundaryFunction({l, m, r}, inf);
}

inline BoundaryFunction abs_cubed() {
    Piece l{-inf, 0, {0, 0, 0, -1}, {}, {}};
    Piece r{0, inf, {0, 0, 0, 1}, {}, {}};
    return BoundaryFunction({l, r}, inf);
}

// f''' = -1 on the left, exp(-t) on the right
inline BoundaryFunction escaping_angle() {
    Piece l{-inf, 0, {0, 0, 0, -1.0 / 6}, {}, {}};
    Piece r{0, inf, {1, -1, 0.5}, {{-1, -1}}, {}};
    return BoundaryFunction({l, r}, inf);
}

}  // namespace fx
