#pragma once

#include <array>
#include <memory>
#include <vector>

#include "bellman/cup_chords.hpp"
#include "bellman/forces.hpp"

namespace bellman {

struct Point {
    double x1 = 0, x2 = 0;
};

inline Point lower_point(double t) { return {t, t * t}; }
inline Point upper_point(double t, double eps) { return {t, t * t + eps * eps}; }

struct SlopeValue {
    double m, m1, m2;
};

// m for a family of right (left) tangents; the force F = eps m'' carries the anchor
struct SlopeFunction {
    Force force;

    Side side() const { return force.side; }
    double eps() const { return force.eps; }
    SlopeValue eval(double u) const;

    static SlopeFunction from_force(const Force& F) { return {F}; }
    // anchored by the slope value m(u0)
    static SlopeFunction from_value(const BoundaryFunction& bf, Side side, double u0, double m0, double eps);
};

inline SlopeValue slope_eval(const SlopeFunction& m, double u) { return m.eval(u); }

double tangent_point(const Point& x, Side side, double eps);

struct Eval {
    double B = 0, g1 = 0, g2 = 0;
};

struct Arc {
    double lo = 0, hi = 0;
};

enum class FigureKind {
    tangent_r,
    tangent_l,
    chordal,
    angle,
    trolleybus_r,
    trolleybus_l,
    birdie,
    multicup,
    closed_multicup,
};

const char* figure_kind_name(FigureKind k);

struct Linear {
    double b0 = 0, b1 = 0, b2 = 0;
    Eval eval(const Point& x) const { return {b0 + b1 * x.x1 + b2 * x.x2, b1, b2}; }
};

struct FigureCandidate {
    FigureKind kind = FigureKind::tangent_r;
    double eps = 0;
    const BoundaryFunction* bf = nullptr;

    // tangent domains
    SlopeFunction slope;
    double u1 = 0, u2 = 0;

    // chordal domains
    std::shared_ptr<const ChordalDomainTable> table;
    double l_lo = 0, l_hi = 0;
    Chord top, bottom;

    // linearity domains
    Linear lin;
    double w = 0;                // angle vertex
    Chord chord;                 // trolleybus / birdie chord, closed multicup hull
    std::vector<Arc> arcs;       // multicups, left to right
    std::vector<Chord> chords;   // multicups: chord i joins arcs i and i+1

    Eval eval(const Point& x) const;
    bool contains(const Point& x, double tol = 1e-12) const;
    // chord through x for chordal figures
    Chord chord_through(const Point& x) const;
};

FigureCandidate tangent_figure(const BoundaryFunction& bf, const SlopeFunction& m, double u1, double u2);
FigureCandidate chordal_figure(const BoundaryFunction& bf, std::shared_ptr<const ChordalDomainTable> table,
                               double l_lo, double l_hi, double eps);

inline Eval figure_eval(const FigureCandidate& fc, const Point& x) { return fc.eval(x); }

// full linear form of an angle from the two border slopes
Linear angle_coefficients(const BoundaryFunction& bf, double w, double mR, double mL, double eps);
// linear form carried by a cup-equation chord (trolleybuses, birdies, multicups)
Linear chord_coefficients(const BoundaryFunction& bf, double a, double b);
// linear form of a single tangent or a solid arc: beta2 = f''/2
Linear point_coefficients(const BoundaryFunction& bf, double w);

struct Interface {
    Point p, q;
};
// segment of the right (left) tangent at u
Interface tangent_interface(double u, Side side, double eps);
Interface chord_interface(double a, double b);

struct GlueResidual {
    double grad_x2 = 0;  // max |jump of dB/dx2|
    double value = 0;    // max |jump of B|
};

GlueResidual glue_check(const FigureCandidate& f1, const FigureCandidate& f2, const Interface& itf, int samples = 16);

}  // namespace bellman
