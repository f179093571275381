#include "bellman/cup_chords.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/roots.hpp>

namespace bellman {

double cup_residual(const BoundaryFunction& bf, double a, double b) {
    double l = b - a;
    if (l <= 0) return 0.0;
    return bf.kernel_integral([&](double t) { return (t - a) * (b - t); }, a, b) / l;
}

std::pair<double, double> differentials(const BoundaryFunction& bf, double a, double b) {
    double l = b - a;
    if (l <= 0) return {0.0, 0.0};
    double dl = -bf.kernel_integral([&](double t) { return b - t; }, a, b) / l;
    double dr = bf.kernel_integral([&](double t) { return t - a; }, a, b) / l;
    return {dl, dr};
}

Chord make_chord(const BoundaryFunction& bf, double a, double b) {
    auto [dl, dr] = differentials(bf, a, b);
    return {a, b, dl, dr};
}

namespace {

// left end s of the cup-equation chord of length l, with s inside [lo, hi]
bool solve_left_end(const BoundaryFunction& bf, double l, double lo, double hi, double& s) {
    auto g = [&](double x) { return cup_residual(bf, x, x + l); };
    double glo = g(lo), ghi = g(hi);
    if (glo == 0) {
        s = lo;
        return true;
    }
    if (ghi == 0) {
        s = hi;
        return true;
    }
    if ((glo > 0) == (ghi > 0)) return false;
    boost::uintmax_t it = 100;
    auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, boost::math::tools::eps_tolerance<double>(52), it);
    s = 0.5 * (r.first + r.second);
    return true;
}

TableSample sample_at(const BoundaryFunction& bf, double l, double a) {
    auto [dl, dr] = differentials(bf, a, a + l);
    return {l, a, a + l, dl, dr};
}

}  // namespace

std::shared_ptr<const ChordalDomainTable> grow_chordal_domain(const BoundaryFunction& bf, const GrowSeed& seed,
                                                              double l_max) {
    auto tab = std::make_shared<ChordalDomainTable>();
    tab->bf = &bf;
    tab->kind = seed.kind;
    double l0;
    if (seed.point) {
        tab->origin = seed.c;
        tab->samples.push_back({0.0, seed.c, seed.c, 0.0, 0.0});
        tab->l_min = 0.0;
        l0 = std::min(1e-4 * bf.root_gap(), 0.5 * l_max);
        double c = seed.c;
        double s;
        if (!(cup_residual(bf, c - l0, c) > 0 && cup_residual(bf, c, c + l0) < 0) ||
            !solve_left_end(bf, l0, c - l0, c, s)) {
            std::ostringstream os;
            os << "point " << c << " does not host a cup (cup residual has no + to - bracket)";
            throw Error(Fault::seed_invalid, os.str());
        }
        tab->samples.push_back(sample_at(bf, l0, s));
    } else {
        const Chord& ch = seed.chord;
        tab->seed = ch;
        l0 = ch.length();
        double scale = 1 + std::abs(bf.d(1, ch.a)) + std::abs(bf.d(1, ch.b));
        if (!(l0 > 0) || std::abs(cup_residual(bf, ch.a, ch.b)) > 1e-9 * scale)
            throw Error(Fault::seed_invalid, "seed chord does not satisfy the cup equation");
        auto [dl, dr] = differentials(bf, ch.a, ch.b);
        if (seed.kind == TableKind::over_chord && !(dl < 0 && dr < 0))
            throw Error(Fault::seed_invalid, "seed chord has vanishing tails");
        tab->samples.push_back({l0, ch.a, ch.b, dl, dr});
        tab->l_min = l0;
    }

    auto slope_a = [](const TableSample& s) {
        double sum = s.dl + s.dr;
        if (std::abs(sum) < 1e-14) return -0.5;
        return -s.dr / sum;
    };

    const double dl_floor = 1e-14;
    while (tab->samples.back().l < l_max) {
        const TableSample prev = tab->samples.back();
        double h = std::min(1e-3 * (1 + prev.l), l_max - prev.l);
        if (h <= 0) break;
        double l = prev.l + h;
        double s;
        bool ok = solve_left_end(bf, l, prev.a - h, prev.a, s);
        if (!ok) {
            double guess = prev.a + h * slope_a(prev);
            ok = solve_left_end(bf, l, guess - 2 * h, guess + 2 * h, s);
        }
        if (!ok) {
            tab->stop = TableStop::degenerate;
            break;
        }
        TableSample cur = sample_at(bf, l, s);
        bool lost = (cur.dl > 0 || cur.dr > 0) && prev.l > tab->l_min;
        bool lost_first = (cur.dl > 0 || cur.dr > 0) && prev.l == tab->l_min && seed.point;
        if (lost || lost_first) {
            // bisect for the length where the first differential vanishes
            bool left = cur.dl > 0;
            double lo = prev.l, hi = l, a_lo = prev.a, a_hi = cur.a;
            for (int it = 0; it < 60 && hi - lo > 1e-13 * (1 + hi); ++it) {
                double m = 0.5 * (lo + hi), sm;
                if (!solve_left_end(bf, m, a_hi - (hi - m), a_lo, sm)) break;
                auto smp = sample_at(bf, m, sm);
                double d = left ? smp.dl : smp.dr;
                if (d > 0) {
                    hi = m;
                    a_hi = sm;
                } else {
                    lo = m;
                    a_lo = sm;
                }
            }
            if (lo > prev.l) tab->samples.push_back(sample_at(bf, lo, a_lo));
            tab->stop = TableStop::differential_zero;
            break;
        }
        if (std::abs(cur.dl + cur.dr) < dl_floor && cur.l > tab->l_min + 1e-9 && !seed.point &&
            seed.kind == TableKind::over_chord) {
            tab->samples.push_back(cur);
            tab->stop = TableStop::degenerate;
            break;
        }
        tab->samples.push_back(cur);
    }
    tab->l_max = tab->samples.back().l;
    return tab;
}

Chord ChordalDomainTable::chord_at(double l) const {
    const double tol = 1e-12 * (1 + std::abs(l_max));
    if (l < l_min - tol || l > l_max + tol) {
        std::ostringstream os;
        os << "chord length " << l << " outside table range [" << l_min << ", " << l_max << "]";
        throw Error(Fault::out_of_range, os.str());
    }
    l = std::clamp(l, l_min, l_max);
    auto it = std::lower_bound(samples.begin(), samples.end(), l,
                               [](const TableSample& s, double x) { return s.l < x; });
    if (it != samples.end() && it->l == l) return {it->a, it->b, it->dl, it->dr};
    const TableSample& hi = *it;
    const TableSample& lo = *(it - 1);
    if (l == 0) return {origin, origin, 0, 0};
    double s;
    if (!solve_left_end(*bf, l, hi.a, lo.a, s)) {
        double w = (l - lo.l) / (hi.l - lo.l);
        double guess = lo.a + w * (hi.a - lo.a);
        double span = std::max(hi.l - lo.l, 1e-12);
        if (!solve_left_end(*bf, l, guess - span, guess + span, s)) s = guess;
    }
    auto [dl, dr] = differentials(*bf, s, s + l);
    return {s, s + l, dl, dr};
}

double ChordalDomainTable::l_for_right_end(double u) const {
    if (u <= samples.front().b) return l_min;
    if (u >= samples.back().b) return l_max;
    auto it = std::lower_bound(samples.begin(), samples.end(), u,
                               [](const TableSample& s, double x) { return s.b < x; });
    double lo = (it - 1)->l, hi = it->l;
    boost::uintmax_t n = 100;
    auto r = boost::math::tools::toms748_solve([&](double l) { return chord_at(l).b - u; }, lo, hi,
                                               boost::math::tools::eps_tolerance<double>(50), n);
    return 0.5 * (r.first + r.second);
}

double ChordalDomainTable::l_for_left_end(double u) const {
    if (u >= samples.front().a) return l_min;
    if (u <= samples.back().a) return l_max;
    auto it = std::lower_bound(samples.begin(), samples.end(), u,
                               [](const TableSample& s, double x) { return s.a > x; });
    double lo = (it - 1)->l, hi = it->l;
    boost::uintmax_t n = 100;
    auto r = boost::math::tools::toms748_solve([&](double l) { return chord_at(l).a - u; }, lo, hi,
                                               boost::math::tools::eps_tolerance<double>(50), n);
    return 0.5 * (r.first + r.second);
}

void ChordalDomainTable::write_csv(std::ostream& os) const {
    os.precision(17);
    os << "l,a,b,D_L,D_R\n";
    for (const auto& s : samples) os << s.l << ',' << s.a << ',' << s.b << ',' << s.dl << ',' << s.dr << '\n';
}

}  // namespace bellman
