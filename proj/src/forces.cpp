#include "bellman/forces.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/roots.hpp>

namespace bellman {

namespace {

double right_anchor_value(const BoundaryFunction& bf, double u0, double F0, double eps, double u) {
    return F0 * std::exp((u0 - u) / eps) + bf.weighted(3, 1.0 / eps, u0, u, u);
}

double left_anchor_value(const BoundaryFunction& bf, double u0, double F0, double eps, double u) {
    return F0 * std::exp((u - u0) / eps) + bf.weighted(3, -1.0 / eps, u, u0, u);
}

// scan extent used where the forces can still change sign
double horizon_scale(const BoundaryFunction& bf) {
    double s = 0;
    for (const auto& r : bf.roots().c) {
        if (std::isfinite(r.lo)) s = std::max(s, std::abs(r.lo));
        if (std::isfinite(r.hi)) s = std::max(s, std::abs(r.hi));
    }
    for (const auto& r : bf.roots().v) s = std::max({s, std::abs(r.lo), std::abs(r.hi)});
    for (double j : bf.junctions()) s = std::max(s, std::abs(j));
    return s;
}

}  // namespace

double Force::start() const {
    if (origin == ForceOrigin::infinity) return side == Side::right ? -inf : inf;
    if (origin == ForceOrigin::chordal_domain) {
        Chord bottom = table->chord_at(l_bottom);
        return side == Side::right ? bottom.b : bottom.a;
    }
    return u0;
}

double Force::eval(double u) const {
    const double tol = 1e-9 * (1 + std::abs(u));
    if (origin == ForceOrigin::infinity) {
        return side == Side::right ? bf->weighted(3, 1.0 / eps, -inf, u, u) : bf->weighted(3, -1.0 / eps, u, inf, u);
    }
    if (origin == ForceOrigin::chordal_domain) {
        Chord top = table->chord_at(l_top);
        if (side == Side::right) {
            if (u >= top.b) return right_anchor_value(*bf, top.b, top.dr, eps, u);
            if (u < start() - tol) throw Error(Fault::out_of_domain, "point left of the chordal domain force");
            return table->chord_at(table->l_for_right_end(u)).dr;
        }
        if (u <= top.a) return left_anchor_value(*bf, top.a, -top.dl, eps, u);
        if (u > start() + tol) throw Error(Fault::out_of_domain, "point right of the chordal domain force");
        return -table->chord_at(table->l_for_left_end(u)).dl;
    }
    if (side == Side::right) {
        if (u < u0 - tol) throw Error(Fault::out_of_domain, "point left of the right force anchor");
        return right_anchor_value(*bf, u0, F0, eps, u);
    }
    if (u > u0 + tol) throw Error(Fault::out_of_domain, "point right of the left force anchor");
    return left_anchor_value(*bf, u0, F0, eps, u);
}

Force anchored_force(const BoundaryFunction& bf, Side side, double u0, double F0, double eps) {
    Force F;
    F.side = side;
    F.origin = ForceOrigin::anchor;
    F.eps = eps;
    F.u0 = u0;
    F.F0 = F0;
    F.bf = &bf;
    return F;
}

Force right_chord_force(const BoundaryFunction& bf, const Chord& ch, double eps) {
    Force F = anchored_force(bf, Side::right, ch.b, ch.dr, eps);
    F.origin = ForceOrigin::chord;
    return F;
}

Force left_chord_force(const BoundaryFunction& bf, const Chord& ch, double eps) {
    Force F = anchored_force(bf, Side::left, ch.a, -ch.dl, eps);
    F.origin = ForceOrigin::chord;
    return F;
}

Force right_infinity_force(const BoundaryFunction& bf, double eps) {
    Force F;
    F.side = Side::right;
    F.origin = ForceOrigin::infinity;
    F.eps = eps;
    F.bf = &bf;
    return F;
}

Force left_infinity_force(const BoundaryFunction& bf, double eps) {
    Force F = right_infinity_force(bf, eps);
    F.side = Side::left;
    return F;
}

Force right_multicup_force(const BoundaryFunction& bf, double w, double beta2, double eps) {
    Force F = anchored_force(bf, Side::right, w, bf.d(2, w) - 2 * beta2, eps);
    F.origin = ForceOrigin::multicup;
    return F;
}

Force left_multicup_force(const BoundaryFunction& bf, double w, double beta2, double eps) {
    Force F = anchored_force(bf, Side::left, w, 2 * beta2 - bf.d(2, w), eps);
    F.origin = ForceOrigin::multicup;
    return F;
}

Force chordal_domain_force(const BoundaryFunction& bf, Side side, std::shared_ptr<const ChordalDomainTable> table,
                           double l_bottom, double l_top, double eps) {
    Force F;
    F.side = side;
    F.origin = ForceOrigin::chordal_domain;
    F.eps = eps;
    F.bf = &bf;
    F.table = std::move(table);
    F.l_bottom = l_bottom;
    F.l_top = l_top;
    return F;
}

Tail tail_endpoint(const Force& F) {
    const BoundaryFunction& bf = *F.bf;
    const double gap = std::min(F.eps, bf.root_gap());
    const double h = gap / 16;
    const double H = horizon_scale(bf) + 50 * F.eps + 10;
    const int dir = F.side == Side::right ? 1 : -1;
    auto bad = [&](double v) { return dir > 0 ? v >= 0 : v <= 0; };

    double t0 = F.start();
    if (std::isinf(t0)) t0 = -dir * H;
    double v0 = F.eval(t0);
    if (bad(v0) && !std::isinf(F.start())) {
        // a vanishing anchor value still has a tail when the force turns strictly signed right away
        double t1 = t0 + dir * 1e-9 * (1 + std::abs(t0));
        if (bad(F.eval(t1))) return {F, t0};
    } else if (bad(v0)) {
        return {F, t0};
    }
    double prev = t0;
    for (double t = t0 + dir * h;; t += dir * h) {
        if (dir * t > H) return {F, dir * inf};
        double v = F.eval(t);
        if (bad(v)) {
            double lo = std::min(prev, t), hi = std::max(prev, t);
            auto g = [&](double x) { return F.eval(x); };
            double glo = g(lo), ghi = g(hi);
            if (glo == 0) return {F, lo};
            if (ghi == 0) return {F, hi};
            if ((glo > 0) == (ghi > 0)) return {F, t};
            boost::uintmax_t it = 200;
            auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                                       boost::math::tools::eps_tolerance<double>(48), it);
            return {F, 0.5 * (r.first + r.second)};
        }
        prev = t;
    }
}

std::optional<double> balance_root(const Force& FR, const Force& FL, double p, double q) {
    if (!(p <= q)) throw Error(Fault::bracket_invalid, "balance bracket has p > q");
    double tR = tail_endpoint(FR).endpoint;
    double tL = tail_endpoint(FL).endpoint;
    double lo = std::max({p, tL, FR.start()});
    double hi = std::min({q, tR, FL.start()});
    if (lo > hi) return std::nullopt;
    auto S = [&](double u) { return FR.eval(u) + FL.eval(u); };
    const double H = horizon_scale(*FR.bf) + 50 * FR.eps + 10;
    if (std::isinf(lo)) lo = std::max(-H, std::isinf(hi) ? -H : hi - H);
    if (std::isinf(hi)) hi = std::min(H, lo + 2 * H);
    double slo = S(lo), shi = S(hi);
    if (slo == 0) return lo;
    if (shi == 0) return hi;
    if (slo > 0 || shi < 0) return std::nullopt;
    boost::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(S, lo, hi, slo, shi, boost::math::tools::eps_tolerance<double>(50), it);
    return 0.5 * (r.first + r.second);
}

double force_derivative_check(const Force& F, double u) {
    const BoundaryFunction& bf = *F.bf;
    double h = 1e-5 * (1 + std::abs(u));
    double fd = (F.eval(u + h) - F.eval(u - h)) / (2 * h);
    double val = F.eval(u);
    double rhs;
    bool inside = false;
    double len = 0;
    if (F.origin == ForceOrigin::chordal_domain) {
        Chord top = F.table->chord_at(F.l_top);
        if (F.side == Side::right && u < top.b) {
            inside = true;
            len = F.table->l_for_right_end(u);
        }
        if (F.side == Side::left && u > top.a) {
            inside = true;
            len = F.table->l_for_left_end(u);
        }
    }
    if (F.side == Side::right)
        rhs = inside ? bf.d(3, u) - 2 * val / len : bf.d(3, u) - val / F.eps;
    else
        rhs = inside ? -bf.d(3, u) + 2 * val / len : val / F.eps - bf.d(3, u);
    return std::abs(fd - rhs);
}

void write_force_csv(std::ostream& os, const Force& FR, const Force& FL, double lo, double hi, int n) {
    os.precision(17);
    os << "u,F_R,F_L,sum\n";
    for (int i = 0; i <= n; ++i) {
        double u = lo + (hi - lo) * i / n;
        double r = FR.eval(u), l = FL.eval(u);
        os << u << ',' << r << ',' << l << ',' << r + l << '\n';
    }
}

}  // namespace bellman
