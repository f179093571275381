#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bellman/errors.hpp"

namespace bellman {

// a * exp(b t)
struct ExpTerm {
    double a = 0, b = 0;
};

// a * cos(b t + c)
struct TrigTerm {
    double a = 0, b = 0, c = 0;
};

struct Piece {
    double lo = -inf, hi = inf;
    std::vector<double> poly;  // ascending powers
    std::vector<ExpTerm> exps;
    std::vector<TrigTerm> trigs;

    double deriv(int k, double t) const;
    // true when the third derivative vanishes identically
    bool flat3() const;
    bool poly_only() const { return exps.empty() && trigs.empty(); }
};

// A point root has lo == hi; rays carry an infinite end.
struct Root {
    double lo = 0, hi = 0;
    bool is_point() const { return lo == hi; }
    double mid() const;
};

struct RootStructure {
    std::vector<Root> c;  // f''' goes + to -
    std::vector<Root> v;  // f''' goes - to +
};

struct Derivs {
    double f, f1, f2, f3;
};

class BoundaryFunction {
public:
    BoundaryFunction() = default;
    BoundaryFunction(std::vector<Piece> pieces, double eps_inf,
                     std::optional<RootStructure> roots_override = std::nullopt);

    Derivs eval(double t) const;
    double d(int k, double t) const;

    // int_p^q exp(lambda (t - shift)) f^{(k)}(t) dt, closed form per piece.
    // p may be -inf and q may be +inf when the weight decays there.
    double weighted(int k, double lambda, double p, double q, double shift) const;

    // int_p^q K(t) f'''(t) dt by Gauss-Legendre on smooth sub-intervals
    double kernel_integral(const std::function<double(double)>& K, double p, double q) const;

    const std::vector<Piece>& pieces() const { return pieces_; }
    const RootStructure& roots() const { return roots_; }
    double eps_inf() const { return eps_inf_; }
    void set_eps_inf(double e) { eps_inf_ = e; }
    std::vector<double> junctions() const;
    // distance scale between consecutive roots, used for step control
    double root_gap() const;
    bool is_quadratic() const;
    const Piece& piece_at(double t) const;

private:
    std::vector<Piece> pieces_;
    double eps_inf_ = inf;
    RootStructure roots_;
};

RootStructure find_roots(const BoundaryFunction& bf);

struct ConditionEntry {
    std::string name;
    bool pass;
    std::string detail;
};

struct ConditionReport {
    int essential_roots = 0;
    double weighted_variation = 0;
    std::vector<ConditionEntry> entries;
    bool pass() const;
};

ConditionReport check_conditions(const BoundaryFunction& bf, double eps_inf);

// int_p^q exp(sign t / eps) f'''(t) dt
double weighted_stieltjes(const BoundaryFunction& bf, double p, double q, double eps, int sign);

// g(t) = a f(alpha t + beta) + b t^2 + c t + d
struct AffineRecord {
    double a = 1, b = 0, c = 0, d = 0, alpha = 1, beta = 0;

    // radius at which the normalized problem (f with sign(a)) has to be solved
    double source_eps(double eps) const;
    // point of the normalized problem corresponding to x for g
    std::pair<double, double> source_point(double x1, double x2) const;
    // B_g(x) from the normalized value B_{sign(a) f}(source_point(x)) at source_eps
    double value(double source_value, double x1, double x2) const;
};

std::pair<BoundaryFunction, AffineRecord> affine_normalize(const BoundaryFunction& bf, double a, double b,
                                                           double c, double d, double alpha, double beta);

// -f, whose maximal Bellman function gives the minimal one of f by negation
BoundaryFunction minimize_variant(const BoundaryFunction& bf);

}  // namespace bellman
