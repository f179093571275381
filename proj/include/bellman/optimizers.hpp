#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bellman/foliation.hpp"

namespace bellman {

// const: value; log: sign * scale * log|tau - tau0| + offset
struct OptimizerPiece {
    bool is_log = false;
    double lo = 0, hi = 0;
    double value = 0;
    int sign = 1;
    double scale = 0;
    double tau0 = 0;
    double offset = 0;

    double eval(double tau) const;
};

struct Optimizer {
    std::vector<OptimizerPiece> pieces;  // partition of [0, 1]
    std::vector<int> path;               // figures visited by the synthesis

    double eval(double tau) const;
    // the same function pulled back from [a, b] to [0, 1] and placed on [a, b]
    Optimizer placed(double a, double b) const;
    Optimizer reversed() const;
    static Optimizer constant(double c);
};

// the parts, each given on [0, 1], laid side by side with the given lengths (summing to 1)
Optimizer concat(const std::vector<std::pair<double, Optimizer>>& parts);

struct Moments {
    double m0 = 0, m1 = 0, m2 = 0;  // integrals of 1, phi - shift, (phi - shift)^2
};

Moments moments(const Optimizer& phi, double a, double b, double shift = 0);
// integral of f(phi) over [a, b]
double f_integral(const Optimizer& phi, const BoundaryFunction& bf, double a = 0, double b = 1);

struct BmoNorm {
    double sup_variance = 0;  // squared norm
    double grid_variance = 0;  // best value on the breakpoint grid before refinement
    double s = 0, t = 0;      // maximizing interval
    double norm() const;
};

BmoNorm bmo_norm(const Optimizer& phi);

// test function for x delivering B(x), built along the incoming-node chain of the candidate
Optimizer optimizer_at(const BellmanCandidate& bc, const Point& x);

struct OptimizerReport {
    double mean_error = 0, square_error = 0, f_error = 0, bmo_excess = 0;
    double B = 0, f_average = 0, bmo = 0;
    bool pass = false;
};

OptimizerReport verify_optimizer(const Optimizer& phi, const Point& x, const BellmanCandidate& bc);

struct DeliveryCurve {
    std::vector<double> tau;
    std::vector<Point> gamma;
    std::vector<double> running_f;
    std::vector<double> bellman;  // B(gamma), NaN when gamma left the strip
    double strip_violation = 0;   // largest distance outside the strip
    double bellman_mismatch = 0;  // largest |B(gamma) - running_f| / (1 + |B|)
    bool convex = true;
};

DeliveryCurve delivery_curve(const Optimizer& phi, const BellmanCandidate& bc, int samples = 200);

nlohmann::json optimizer_to_json(const Optimizer& phi);
Optimizer optimizer_from_json(const nlohmann::json& j);
void write_optimizer_csv(std::ostream& os, const Optimizer& phi, int samples = 400);
void write_delivery_csv(std::ostream& os, const DeliveryCurve& c);

}  // namespace bellman
