#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "bellman/foliation.hpp"

namespace bellman {

struct CheckEntry {
    std::string name;
    double value = 0;
    double threshold = 0;
    bool pass = false;
    std::string detail;
};

struct PropertyReport {
    std::vector<CheckEntry> entries;
    bool pass() const;
    void add(const std::string& name, double value, double threshold, const std::string& detail = {});
    void print(std::ostream& os) const;
    nlohmann::json to_json() const;
};

struct PropertyOptions {
    double x_lo = -2, x_hi = 2;
    int boundary_points = 1000;
    int locate_points = 10000;
    int segments = 1000;
    int interface_samples = 16;
    int monge_ampere_points = 1000;
    int optimizer_points = 200;
    std::uint64_t seed = 1;

    double boundary_tol = 1e-10;
    double concavity_tol = 1e-9;
    double gradient_tol = 1e-6;
    double monge_ampere_tol = 1e-6;
};

// uniform in x1, uniform in the height above the lower parabola
Point random_strip_point(std::mt19937_64& rng, double lo, double hi, double eps);

// max |B(t, t^2) - f(t)| / (1 + |f(t)|)
double boundary_defect(const BellmanCandidate& bc, double lo, double hi, int n);
// number of points the candidate fails to place in a figure
int locate_failures(const BellmanCandidate& bc, double lo, double hi, int n, std::mt19937_64& rng);
// max of ((B(y) + B(z)) / 2 - B(mid)) / (1 + |B(mid)|) over random segments inside the strip
double concavity_defect(const BellmanCandidate& bc, double lo, double hi, int n, std::mt19937_64& rng);
// borders between figures: tangents at the edge ends and the top chords of chordal stacks
std::vector<Interface> candidate_interfaces(const BellmanCandidate& bc);
// max gradient jump across the borders, relative to 1 + |gradient|
double gradient_jump(const BellmanCandidate& bc, int samples);
// max |det Hess B| / (|Hess B|^2 + s^2), s = 1e-6 (1 + |grad B|), Hessian from differences of the gradient
double monge_ampere_residual(const BellmanCandidate& bc, double lo, double hi, int n, std::mt19937_64& rng);

struct OptimizerStats {
    int points = 0, failures = 0, errors = 0;
    double mean_error = 0, square_error = 0, f_error = 0, bmo_excess = -inf;
    std::string first_problem;
};

OptimizerStats optimizer_check(const BellmanCandidate& bc, double lo, double hi, int n, std::mt19937_64& rng);

PropertyReport run_properties(const BellmanCandidate& bc, const PropertyOptions& opt);

}  // namespace bellman
