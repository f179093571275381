#include "bellman/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/roots.hpp>

namespace bellman {

const char* figure_kind_name(FigureKind k) {
    switch (k) {
        case FigureKind::tangent_r: return "tangent_R";
        case FigureKind::tangent_l: return "tangent_L";
        case FigureKind::chordal: return "chordal";
        case FigureKind::angle: return "angle";
        case FigureKind::trolleybus_r: return "trolleybus_R";
        case FigureKind::trolleybus_l: return "trolleybus_L";
        case FigureKind::birdie: return "birdie";
        case FigureKind::multicup: return "multicup";
        case FigureKind::closed_multicup: return "closed_multicup";
    }
    return "figure";
}

SlopeValue SlopeFunction::eval(double u) const {
    const BoundaryFunction& bf = *force.bf;
    const double eps = force.eps;
    double F = force.eval(u);
    double f1 = bf.d(1, u), f2 = bf.d(2, u);
    if (force.side == Side::right) return {f1 - eps * f2 + eps * F, f2 - F, F / eps};
    return {f1 + eps * f2 + eps * F, f2 + F, F / eps};
}

SlopeFunction SlopeFunction::from_value(const BoundaryFunction& bf, Side side, double u0, double m0, double eps) {
    double f1 = bf.d(1, u0), f2 = bf.d(2, u0);
    double F0 = side == Side::right ? (m0 - f1 + eps * f2) / eps : (m0 - f1 - eps * f2) / eps;
    return {anchored_force(bf, side, u0, F0, eps)};
}

double tangent_point(const Point& x, Side side, double eps) {
    double r = std::sqrt(std::max(0.0, x.x1 * x.x1 + eps * eps - x.x2));
    return side == Side::right ? x.x1 + eps - r : x.x1 - eps + r;
}

namespace {

double chord_height(double a, double b, double x1) { return (a + b) * x1 - a * b; }

bool strictly_below(const Chord& ch, const Point& x, double tol) {
    return x.x1 > ch.a && x.x1 < ch.b && x.x2 < chord_height(ch.a, ch.b, x.x1) - tol * (1 + std::abs(x.x2));
}

bool on_or_below(const Chord& ch, const Point& x, double tol) {
    double s = tol * (1 + std::abs(x.x1));
    return x.x1 >= ch.a - s && x.x1 <= ch.b + s &&
           x.x2 <= chord_height(ch.a, ch.b, x.x1) + tol * (1 + std::abs(x.x2));
}

Eval chord_eval(const BoundaryFunction& bf, double a, double b, const Point& x) {
    if (b - a <= 0) {
        auto d = bf.eval(a);
        double g2 = 0.5 * d.f2;
        return {d.f, d.f1 - 2 * g2 * a, g2};
    }
    double fa = bf.d(0, a), fb = bf.d(0, b);
    double slope = (fb - fa) / (b - a);
    double g2 = (bf.d(1, b) - bf.d(1, a)) / (2 * (b - a));
    return {fa + slope * (x.x1 - a), slope - g2 * (a + b), g2};
}

}  // namespace

Chord FigureCandidate::chord_through(const Point& x) const {
    const auto& smp = table->samples;
    auto height = [&](double a, double b) {
        return (x.x1 >= a && x.x1 <= b) ? chord_height(a, b, x.x1) : x.x1 * x.x1;
    };
    if (x.x2 - x.x1 * x.x1 <= 1e-15 * (1 + std::abs(x.x2))) {
        double l;
        if (table->kind == TableKind::cup_from_point && x.x1 >= table->origin)
            l = table->l_for_right_end(x.x1);
        else if (table->kind == TableKind::cup_from_point)
            l = table->l_for_left_end(x.x1);
        else
            l = x.x1 >= table->seed.b ? table->l_for_right_end(x.x1) : table->l_for_left_end(x.x1);
        return table->chord_at(std::clamp(l, l_lo, l_hi));
    }
    size_t i = 0;
    while (i < smp.size() && height(smp[i].a, smp[i].b) < x.x2) ++i;
    if (i == smp.size()) return table->chord_at(table->l_max);
    if (i == 0) return table->chord_at(smp[0].l);
    double lo = smp[i - 1].l, hi = smp[i].l;
    auto g = [&](double l) {
        Chord c = table->chord_at(l);
        return height(c.a, c.b) - x.x2;
    };
    double glo = g(lo), ghi = g(hi);
    if (glo >= 0) return table->chord_at(lo);
    if (ghi <= 0) return table->chord_at(hi);
    boost::uintmax_t it = 100;
    auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, boost::math::tools::eps_tolerance<double>(50), it);
    return table->chord_at(0.5 * (r.first + r.second));
}

Eval FigureCandidate::eval(const Point& x) const {
    switch (kind) {
        case FigureKind::tangent_r:
        case FigureKind::tangent_l: {
            Side side = kind == FigureKind::tangent_r ? Side::right : Side::left;
            double u = tangent_point(x, side, eps);
            SlopeValue m = slope.eval(u);
            double foot = side == Side::right ? u - eps : u + eps;
            return {m.m * (x.x1 - u) + bf->d(0, u), m.m - m.m1 * foot, 0.5 * m.m1};
        }
        case FigureKind::chordal: {
            Chord c = chord_through(x);
            return chord_eval(*bf, c.a, c.b, x);
        }
        default:
            return lin.eval(x);
    }
}

bool FigureCandidate::contains(const Point& x, double tol) const {
    double uR = tangent_point(x, Side::right, eps);
    double uL = tangent_point(x, Side::left, eps);
    double su = tol * (1 + std::abs(x.x1));
    switch (kind) {
        case FigureKind::tangent_r: return uR >= u1 - su && uR <= u2 + su;
        case FigureKind::tangent_l: return uL >= u1 - su && uL <= u2 + su;
        case FigureKind::chordal: {
            if (!on_or_below(top, x, tol)) return false;
            if (l_lo <= 0) return true;
            return !strictly_below(bottom, x, tol);
        }
        case FigureKind::angle: return uR >= w - su && uL <= w + su;
        case FigureKind::trolleybus_r: return uR >= chord.a - su && uR <= chord.b + su && !strictly_below(chord, x, tol);
        case FigureKind::trolleybus_l: return uL >= chord.a - su && uL <= chord.b + su && !strictly_below(chord, x, tol);
        case FigureKind::birdie: return uR >= chord.a - su && uL <= chord.b + su && !strictly_below(chord, x, tol);
        case FigureKind::multicup: {
            double p = arcs.front().lo, q = arcs.back().hi;
            if (uL < p - su || uR > q + su) return false;
            for (const auto& c : chords)
                if (strictly_below(c, x, tol)) return false;
            return true;
        }
        case FigureKind::closed_multicup: {
            if (!on_or_below(chord, x, tol)) return false;
            for (const auto& c : chords)
                if (strictly_below(c, x, tol)) return false;
            return true;
        }
    }
    return false;
}

FigureCandidate tangent_figure(const BoundaryFunction& bf, const SlopeFunction& m, double u1, double u2) {
    FigureCandidate fc;
    fc.kind = m.side() == Side::right ? FigureKind::tangent_r : FigureKind::tangent_l;
    fc.eps = m.eps();
    fc.bf = &bf;
    fc.slope = m;
    fc.u1 = u1;
    fc.u2 = u2;
    return fc;
}

FigureCandidate chordal_figure(const BoundaryFunction& bf, std::shared_ptr<const ChordalDomainTable> table,
                               double l_lo, double l_hi, double eps) {
    FigureCandidate fc;
    fc.kind = FigureKind::chordal;
    fc.eps = eps;
    fc.bf = &bf;
    fc.table = std::move(table);
    fc.l_lo = l_lo;
    fc.l_hi = l_hi;
    fc.top = fc.table->chord_at(l_hi);
    fc.bottom = fc.table->chord_at(l_lo);
    return fc;
}

namespace {

Linear linear_from_beta2(const BoundaryFunction& bf, double w, double beta2) {
    auto d = bf.eval(w);
    return {d.f - w * d.f1 + beta2 * w * w, d.f1 - 2 * beta2 * w, beta2};
}

}  // namespace

Linear angle_coefficients(const BoundaryFunction& bf, double w, double mR, double mL, double eps) {
    double f1 = bf.d(1, w);
    double tol = 1e-7 * (1 + std::abs(f1) + std::abs(mR) + std::abs(mL));
    if (std::abs(mR + mL - 2 * f1) > tol) {
        std::ostringstream os;
        os.precision(17);
        os << "angle at " << w << " is unbalanced: m_R + m_L - 2 f' = " << mR + mL - 2 * f1;
        throw Error(Fault::unbalanced, os.str());
    }
    return linear_from_beta2(bf, w, (mL - mR) / (4 * eps));
}

Linear chord_coefficients(const BoundaryFunction& bf, double a, double b) {
    if (b - a <= 0) return point_coefficients(bf, a);
    double fa = bf.d(0, a), fb = bf.d(0, b);
    double b2 = (bf.d(1, b) - bf.d(1, a)) / (2 * (b - a));
    double b1 = (fb - fa) / (b - a) - (a + b) * b2;
    double b0 = (b * fa - a * fb) / (b - a) + a * b * b2;
    return {b0, b1, b2};
}

Linear point_coefficients(const BoundaryFunction& bf, double w) { return linear_from_beta2(bf, w, 0.5 * bf.d(2, w)); }

Interface tangent_interface(double u, Side side, double eps) {
    double foot = side == Side::right ? u - eps : u + eps;
    return {lower_point(u), upper_point(foot, eps)};
}

Interface chord_interface(double a, double b) { return {lower_point(a), lower_point(b)}; }

GlueResidual glue_check(const FigureCandidate& f1, const FigureCandidate& f2, const Interface& itf, int samples) {
    GlueResidual r;
    for (int i = 0; i <= samples; ++i) {
        double s = double(i) / samples;
        Point x{itf.p.x1 + s * (itf.q.x1 - itf.p.x1), itf.p.x2 + s * (itf.q.x2 - itf.p.x2)};
        Eval e1 = f1.eval(x), e2 = f2.eval(x);
        r.grad_x2 = std::max(r.grad_x2, std::abs(e1.g2 - e2.g2));
        r.value = std::max(r.value, std::abs(e1.B - e2.B));
    }
    return r;
}

}  // namespace bellman
