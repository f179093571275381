#pragma once

#include <memory>
#include <optional>
#include <ostream>

#include "bellman/boundary_function.hpp"
#include "bellman/cup_chords.hpp"

namespace bellman {

enum class Side { left, right };

enum class ForceOrigin { chord, chordal_domain, multicup, infinity, anchor };

// Right forces live on [start, inf), left forces on (-inf, start].
struct Force {
    Side side = Side::right;
    ForceOrigin origin = ForceOrigin::infinity;
    double eps = 0;
    double u0 = 0;  // anchor abscissa
    double F0 = 0;  // value at the anchor
    const BoundaryFunction* bf = nullptr;
    std::shared_ptr<const ChordalDomainTable> table;  // chordal-domain origin
    double l_bottom = 0, l_top = 0;

    double eval(double u) const;
    // first abscissa of the domain (the anchor, or the bottom chord end for a chordal domain)
    double start() const;
};

Force right_chord_force(const BoundaryFunction& bf, const Chord& ch, double eps);
Force left_chord_force(const BoundaryFunction& bf, const Chord& ch, double eps);
Force right_infinity_force(const BoundaryFunction& bf, double eps);
Force left_infinity_force(const BoundaryFunction& bf, double eps);
// multicup with linear part coefficient beta2 and border abscissa w
Force right_multicup_force(const BoundaryFunction& bf, double w, double beta2, double eps);
Force left_multicup_force(const BoundaryFunction& bf, double w, double beta2, double eps);
Force anchored_force(const BoundaryFunction& bf, Side side, double u0, double F0, double eps);
Force chordal_domain_force(const BoundaryFunction& bf, Side side, std::shared_ptr<const ChordalDomainTable> table,
                           double l_bottom, double l_top, double eps);

inline double force_eval(const Force& F, double u) { return F.eval(u); }

struct Tail {
    Force force;
    double endpoint;  // t^R for right forces, t^L for left forces
};

Tail tail_endpoint(const Force& F);

std::optional<double> balance_root(const Force& FR, const Force& FL, double p, double q);

// |finite-difference derivative - right side of the force ODE|
double force_derivative_check(const Force& F, double u);

void write_force_csv(std::ostream& os, const Force& FR, const Force& FL, double lo, double hi, int n);

}  // namespace bellman
