#include "bellman/boundary_function.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/Polynomials>

namespace bellman {

const char* fault_name(Fault f) {
    switch (f) {
        case Fault::input: return "InputError";
        case Fault::non_alternating_signs: return "NonAlternatingSigns";
        case Fault::divergent: return "Divergent";
        case Fault::degenerate_transform: return "DegenerateTransform";
        case Fault::seed_invalid: return "SeedInvalid";
        case Fault::continuation_stall: return "ContinuationStall";
        case Fault::out_of_range: return "OutOfRange";
        case Fault::out_of_domain: return "OutOfDomain";
        case Fault::bracket_invalid: return "BracketInvalid";
        case Fault::unbalanced: return "Unbalanced";
        case Fault::outside_figure: return "OutsideFigure";
        case Fault::glue_failure: return "GlueFailure";
        case Fault::outside_strip: return "OutsideStrip";
        case Fault::eps_too_large: return "EpsTooLarge";
        case Fault::step_too_large: return "StepTooLarge";
        case Fault::unknown_configuration: return "UnknownConfiguration";
        case Fault::iteration_cap: return "IterationCapExceeded";
        case Fault::synthesis_failure: return "SynthesisFailure";
        case Fault::no_convergence: return "NoConvergence";
    }
    return "Error";
}

namespace {

constexpr double half_pi = 1.5707963267948966;

// coefficients of the k-th derivative, ascending
std::vector<double> poly_deriv(const std::vector<double>& p, int k) {
    std::vector<double> out;
    for (size_t i = k; i < p.size(); ++i) {
        double c = p[i];
        for (int j = 0; j < k; ++j) c *= double(i - j);
        out.push_back(c);
    }
    while (!out.empty() && out.back() == 0.0) out.pop_back();
    return out;
}

double horner(const std::vector<double>& p, double t) {
    double s = 0;
    for (size_t i = p.size(); i-- > 0;) s = s * t + p[i];
    return s;
}

// antiderivative of exp(lambda (t - s)) P(t), lambda != 0, without the exponential factor
double poly_exp_prim(const std::vector<double>& P, double lambda, double t) {
    std::vector<double> q = P;
    double sum = 0, scale = 1.0 / lambda, sgn = 1;
    while (!q.empty()) {
        sum += sgn * scale * horner(q, t);
        q = poly_deriv(q, 1);
        scale /= lambda;
        sgn = -sgn;
    }
    return sum;
}

double weighted_piece(const Piece& pc, int k, double lambda, double p, double q, double shift) {
    double total = 0;
    const bool pinf = std::isinf(p), qinf = std::isinf(q);
    auto divergent = [&](const char* what) {
        std::ostringstream os;
        os << "weighted integral diverges (" << what << ") on [" << p << ", " << q << "] with rate " << lambda;
        throw Error(Fault::divergent, os.str());
    };

    auto P = poly_deriv(pc.poly, k);
    if (!P.empty()) {
        if (lambda == 0.0) {
            if (pinf || qinf) divergent("polynomial");
            std::vector<double> prim(P.size() + 1, 0.0);
            for (size_t i = 0; i < P.size(); ++i) prim[i + 1] = P[i] / double(i + 1);
            total += horner(prim, q) - horner(prim, p);
        } else {
            if (pinf && lambda <= 0) divergent("polynomial");
            if (qinf && lambda >= 0) divergent("polynomial");
            double hi = qinf ? 0.0 : std::exp(lambda * (q - shift)) * poly_exp_prim(P, lambda, q);
            double lo = pinf ? 0.0 : std::exp(lambda * (p - shift)) * poly_exp_prim(P, lambda, p);
            total += hi - lo;
        }
    }

    for (const auto& e : pc.exps) {
        double A = e.a * std::pow(e.b, k);
        if (A == 0.0) continue;
        double delta = e.b + lambda;
        if (delta == 0.0) {
            if (pinf || qinf) divergent("exponential");
            total += A * std::exp(-lambda * shift) * (q - p);
        } else if (!pinf && !qinf) {
            total += A * std::exp(delta * p - lambda * shift) * std::expm1(delta * (q - p)) / delta;
        } else if (pinf && qinf) {
            divergent("exponential");
        } else if (qinf) {
            if (delta >= 0) divergent("exponential");
            total += A * std::exp(delta * p - lambda * shift) * (-1.0 / delta);
        } else {
            if (delta <= 0) divergent("exponential");
            total += A * std::exp(delta * q - lambda * shift) / delta;
        }
    }

    for (const auto& tr : pc.trigs) {
        double A = tr.a * std::pow(tr.b, k);
        if (A == 0.0) continue;
        double c = tr.c + k * half_pi;
        double b = tr.b;
        if (lambda == 0.0) {
            if (pinf || qinf) divergent("trigonometric");
            if (b == 0.0)
                total += A * std::cos(c) * (q - p);
            else
                total += A * (std::sin(b * q + c) - std::sin(b * p + c)) / b;
            continue;
        }
        if (pinf && lambda <= 0) divergent("trigonometric");
        if (qinf && lambda >= 0) divergent("trigonometric");
        double den = lambda * lambda + b * b;
        auto prim = [&](double t) {
            return std::exp(lambda * (t - shift)) * (lambda * std::cos(b * t + c) + b * std::sin(b * t + c)) / den;
        };
        total += A * ((qinf ? 0.0 : prim(q)) - (pinf ? 0.0 : prim(p)));
    }
    return total;
}

// sign of f''' on open sub-intervals of one piece
struct SignSeg {
    double lo, hi;
    int sign;
};

int sgn(double x) { return (x > 0) - (x < 0); }

double probe_point(double lo, double hi) {
    if (std::isinf(lo) && std::isinf(hi)) return 0.0;
    if (std::isinf(lo)) return hi - 1.0 - std::abs(hi);
    if (std::isinf(hi)) return lo + 1.0 + std::abs(lo);
    return 0.5 * (lo + hi);
}

void piece_signs(const Piece& pc, std::vector<SignSeg>& out) {
    if (pc.flat3()) {
        out.push_back({pc.lo, pc.hi, 0});
        return;
    }
    std::vector<double> cuts;
    if (pc.poly_only()) {
        auto P = poly_deriv(pc.poly, 3);
        if (P.size() == 2) {
            cuts.push_back(-P[0] / P[1]);
        } else if (P.size() > 2) {
            Eigen::VectorXd coeffs(P.size());
            for (size_t i = 0; i < P.size(); ++i) coeffs[i] = P[i];
            Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(coeffs);
            for (int i = 0; i < solver.roots().size(); ++i) {
                auto r = solver.roots()[i];
                if (std::abs(r.imag()) <= 1e-7 * (1 + std::abs(r.real()))) cuts.push_back(r.real());
            }
        }
    } else {
        const double T = 60.0;
        double a = std::max(pc.lo, -T), b = std::min(pc.hi, T);
        const int n = 4000;
        double t_prev = a, s_prev = sgn(pc.deriv(3, a));
        for (int i = 1; i <= n; ++i) {
            double t = a + (b - a) * i / n;
            int s = sgn(pc.deriv(3, t));
            if (s == 0) continue;
            if (s_prev != 0 && s != s_prev) {
                boost::uintmax_t it = 200;
                auto r = boost::math::tools::toms748_solve([&](double x) { return pc.deriv(3, x); }, t_prev, t,
                                                           boost::math::tools::eps_tolerance<double>(50), it);
                cuts.push_back(0.5 * (r.first + r.second));
            }
            t_prev = t;
            s_prev = s;
        }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> pts{pc.lo};
    for (double c : cuts)
        if (c > pc.lo && c < pc.hi && c > pts.back()) pts.push_back(c);
    pts.push_back(pc.hi);
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        int s = sgn(pc.deriv(3, probe_point(pts[i], pts[i + 1])));
        out.push_back({pts[i], pts[i + 1], s});
    }
}

}  // namespace

double Root::mid() const {
    if (std::isinf(lo) && std::isinf(hi)) return lo;
    if (std::isinf(lo)) return hi;
    if (std::isinf(hi)) return lo;
    return 0.5 * (lo + hi);
}

double Piece::deriv(int k, double t) const {
    double s = 0;
    if (!poly.empty()) s += horner(poly_deriv(poly, k), t);
    for (const auto& e : exps) s += e.a * std::pow(e.b, k) * std::exp(e.b * t);
    for (const auto& tr : trigs) s += tr.a * std::pow(tr.b, k) * std::cos(tr.b * t + tr.c + k * half_pi);
    return s;
}

bool Piece::flat3() const {
    if (!poly_deriv(poly, 3).empty()) return false;
    for (const auto& e : exps)
        if (e.a != 0 && e.b != 0) return false;
    for (const auto& tr : trigs)
        if (tr.a != 0 && tr.b != 0) return false;
    return true;
}

BoundaryFunction::BoundaryFunction(std::vector<Piece> pieces, double eps_inf,
                                   std::optional<RootStructure> roots_override)
    : pieces_(std::move(pieces)), eps_inf_(eps_inf) {
    if (pieces_.empty()) throw Error(Fault::input, "boundary function has no pieces");
    if (pieces_.front().lo != -inf || pieces_.back().hi != inf)
        throw Error(Fault::input, "pieces must cover the whole line");
    for (size_t i = 0; i < pieces_.size(); ++i) {
        if (!(pieces_[i].lo < pieces_[i].hi)) throw Error(Fault::input, "empty piece");
        if (i + 1 < pieces_.size() && pieces_[i].hi != pieces_[i + 1].lo)
            throw Error(Fault::input, "pieces must be contiguous and ordered");
    }
    if (!(eps_inf_ > 0)) throw Error(Fault::input, "eps_inf must be positive");
    roots_ = roots_override ? *roots_override : find_roots(*this);
    if (roots_override) {
        std::vector<std::pair<double, bool>> seq;
        for (const auto& r : roots_.c) seq.push_back({r.mid(), true});
        for (const auto& r : roots_.v) seq.push_back({r.mid(), false});
        std::sort(seq.begin(), seq.end());
        for (size_t i = 0; i < seq.size(); ++i)
            if (seq[i].second != (i % 2 == 0) || (i + 1 == seq.size() && !seq[i].second))
                throw Error(Fault::non_alternating_signs, "root override does not alternate c, v, ..., c");
    }
}

const Piece& BoundaryFunction::piece_at(double t) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                               [](double x, const Piece& p) { return x < p.lo; });
    if (it == pieces_.begin()) return pieces_.front();
    return *(it - 1);
}

Derivs BoundaryFunction::eval(double t) const {
    const auto& p = piece_at(t);
    return {p.deriv(0, t), p.deriv(1, t), p.deriv(2, t), p.deriv(3, t)};
}

double BoundaryFunction::d(int k, double t) const { return piece_at(t).deriv(k, t); }

double BoundaryFunction::weighted(int k, double lambda, double p, double q, double shift) const {
    if (p == q) return 0.0;
    if (p > q) return -weighted(k, lambda, q, p, shift);
    double total = 0;
    for (const auto& pc : pieces_) {
        double lo = std::max(p, pc.lo), hi = std::min(q, pc.hi);
        if (lo >= hi) continue;
        total += weighted_piece(pc, k, lambda, lo, hi, shift);
    }
    return total;
}

double BoundaryFunction::kernel_integral(const std::function<double(double)>& K, double p, double q) const {
    if (p == q) return 0.0;
    if (p > q) return -kernel_integral(K, q, p);
    double total = 0;
    for (const auto& pc : pieces_) {
        double lo = std::max(p, pc.lo), hi = std::min(q, pc.hi);
        if (lo >= hi || pc.flat3()) continue;
        double rate = 1.0;
        for (const auto& e : pc.exps) rate = std::max(rate, std::abs(e.b));
        for (const auto& tr : pc.trigs) rate = std::max(rate, std::abs(tr.b));
        int chunks = pc.poly_only() ? 1 : std::max(1, int(std::ceil((hi - lo) * rate / 2.0)));
        for (int i = 0; i < chunks; ++i) {
            double a = lo + (hi - lo) * i / chunks, b = (i + 1 == chunks) ? hi : lo + (hi - lo) * (i + 1) / chunks;
            total += boost::math::quadrature::gauss<double, 20>::integrate(
                [&](double t) { return K(t) * pc.deriv(3, t); }, a, b);
        }
    }
    return total;
}

std::vector<double> BoundaryFunction::junctions() const {
    std::vector<double> j;
    for (size_t i = 1; i < pieces_.size(); ++i) j.push_back(pieces_[i].lo);
    return j;
}

double BoundaryFunction::root_gap() const {
    std::vector<Root> all;
    for (auto& r : roots_.c) all.push_back(r);
    for (auto& r : roots_.v) all.push_back(r);
    std::sort(all.begin(), all.end(), [](const Root& a, const Root& b) { return a.mid() < b.mid(); });
    double gap = inf;
    for (size_t i = 0; i + 1 < all.size(); ++i) {
        double g = all[i + 1].lo - all[i].hi;
        if (std::isfinite(g)) gap = std::min(gap, g);
    }
    for (auto& r : all)
        if (!r.is_point() && std::isfinite(r.hi - r.lo)) gap = std::min(gap, r.hi - r.lo);
    return std::isfinite(gap) ? gap : 1.0;
}

bool BoundaryFunction::is_quadratic() const {
    return std::all_of(pieces_.begin(), pieces_.end(), [](const Piece& p) { return p.flat3(); });
}

RootStructure find_roots(const BoundaryFunction& bf) {
    std::vector<SignSeg> segs;
    for (const auto& pc : bf.pieces()) piece_signs(pc, segs);

    // merge equal neighbours; isolated zeros of f''' never form a segment
    std::vector<SignSeg> merged;
    for (const auto& s : segs) {
        if (!merged.empty() && merged.back().sign == s.sign)
            merged.back().hi = s.hi;
        else
            merged.push_back(s);
    }

    struct Tagged {
        Root r;
        bool is_c;
    };
    std::vector<Tagged> seq;
    std::vector<size_t> runs;
    for (size_t i = 0; i < merged.size(); ++i)
        if (merged[i].sign != 0) runs.push_back(i);

    if (!runs.empty()) {
        const auto& first = merged[runs.front()];
        if (first.sign < 0) seq.push_back({Root{-inf, std::isinf(first.lo) ? -inf : first.lo}, true});
        for (size_t k = 0; k + 1 < runs.size(); ++k) {
            const auto& A = merged[runs[k]];
            const auto& B = merged[runs[k + 1]];
            if (A.sign == B.sign) continue;
            seq.push_back({Root{A.hi, B.lo}, A.sign > 0});
        }
        const auto& last = merged[runs.back()];
        if (last.sign > 0) seq.push_back({Root{std::isinf(last.hi) ? inf : last.hi, inf}, true});
    }

    RootStructure rs;
    for (size_t i = 0; i < seq.size(); ++i) {
        bool expect_c = (i % 2 == 0);
        if (seq[i].is_c != expect_c) throw Error(Fault::non_alternating_signs, "sign pattern of f''' does not alternate");
        (seq[i].is_c ? rs.c : rs.v).push_back(seq[i].r);
    }
    if (!seq.empty() && !seq.back().is_c)
        throw Error(Fault::non_alternating_signs, "root list must end with a c-root");
    return rs;
}

bool ConditionReport::pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const ConditionEntry& e) { return e.pass; });
}

namespace {

// growth rate of |f^{(r)}| at +inf (dir=+1) or -inf (dir=-1) on an unbounded piece: the largest
// exponential rate; polynomial and trigonometric terms count as rate 0
double growth_rate(const Piece& pc, int dir, int r) {
    double rate = -inf;
    if (!poly_deriv(pc.poly, r).empty()) rate = 0;
    for (const auto& tr : pc.trigs)
        if (tr.a * std::pow(tr.b, r) != 0) rate = std::max(rate, 0.0);
    for (const auto& e : pc.exps)
        if (e.a * std::pow(e.b, r) != 0) rate = std::max(rate, dir * e.b);
    return rate;
}

}  // namespace

ConditionReport check_conditions(const BoundaryFunction& bf, double eps_inf) {
    ConditionReport rep;
    auto add = [&](std::string name, bool ok, std::string detail) {
        rep.entries.push_back({std::move(name), ok, std::move(detail)});
    };
    add("eps_inf positive", eps_inf > 0, "");

    double jump = 0;
    for (size_t i = 1; i < bf.pieces().size(); ++i) {
        const auto& L = bf.pieces()[i - 1];
        const auto& R = bf.pieces()[i];
        double t = R.lo;
        for (int k = 0; k <= 2; ++k) {
            double a = L.deriv(k, t), b = R.deriv(k, t);
            jump = std::max(jump, std::abs(a - b) / (1 + std::abs(L.deriv(0, t))));
        }
    }
    {
        std::ostringstream os;
        os << "max relative jump of f, f', f'' at junctions " << jump;
        add("C2 junctions", jump <= 1e-12, os.str());
    }

    try {
        auto rs = find_roots(bf);
        rep.essential_roots = int(rs.c.size() + rs.v.size());
        add("essential roots alternate", true, std::to_string(rep.essential_roots) + " essential roots");
    } catch (const Error& e) {
        add("essential roots alternate", false, e.what());
    }

    bool decay_ok = eps_inf > 0;
    bool variation_ok = eps_inf > 0;
    const auto& first = bf.pieces().front();
    const auto& last = bf.pieces().back();
    for (int r = 0; r <= 3 && eps_inf > 0; ++r) {
        bool ok = growth_rate(first, -1, r) < 1.0 / eps_inf && growth_rate(last, +1, r) < 1.0 / eps_inf;
        if (r <= 2)
            decay_ok = decay_ok && ok;
        else
            variation_ok = ok;
    }
    add("decay of f, f', f'' against exp(-|t|/eps_inf)", decay_ok, "");

    double value = inf;
    if (variation_ok) {
        auto integrand = [&](double t) {
            double v = std::abs(bf.d(3, t)) * std::exp(-std::abs(t) / eps_inf);
            return std::isfinite(v) ? v : 0.0;
        };
        std::vector<double> cuts{0.0};
        for (double j : bf.junctions()) cuts.push_back(j);
        for (const auto& r : bf.roots().c) {
            if (std::isfinite(r.lo)) cuts.push_back(r.lo);
            if (std::isfinite(r.hi)) cuts.push_back(r.hi);
        }
        for (const auto& r : bf.roots().v) {
            cuts.push_back(r.lo);
            cuts.push_back(r.hi);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        value = 0;
        for (size_t i = 0; i + 1 < cuts.size(); ++i)
            value += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, cuts[i], cuts[i + 1],
                                                                                    15, 1e-12);
        boost::math::quadrature::exp_sinh<double> es;
        double hi = cuts.back(), lo = cuts.front();
        value += es.integrate([&](double s) { return integrand(hi + s); });
        value += es.integrate([&](double s) { return integrand(lo - s); });
        variation_ok = std::isfinite(value);
    }
    rep.weighted_variation = value;
    {
        std::ostringstream os;
        os.precision(17);
        os << "int exp(-|t|/eps_inf)|f'''(t)| dt = " << value;
        add("summability", variation_ok, os.str());
    }
    return rep;
}

double weighted_stieltjes(const BoundaryFunction& bf, double p, double q, double eps, int sign) {
    return bf.weighted(3, sign / eps, p, q, 0.0);
}

double AffineRecord::source_eps(double eps) const { return std::abs(alpha) * eps; }

std::pair<double, double> AffineRecord::source_point(double x1, double x2) const {
    return {alpha * x1 + beta, alpha * alpha * x2 + 2 * alpha * beta * x1 + beta * beta};
}

double AffineRecord::value(double source_value, double x1, double x2) const {
    return std::abs(a) * source_value + b * x2 + c * x1 + d;
}

std::pair<BoundaryFunction, AffineRecord> affine_normalize(const BoundaryFunction& bf, double a, double b,
                                                           double c, double d, double alpha, double beta) {
    if (a == 0 || alpha == 0) throw Error(Fault::degenerate_transform, "affine_normalize needs a != 0 and alpha != 0");
    std::vector<Piece> out;
    for (const auto& pc : bf.pieces()) {
        Piece q;
        double lo = (pc.lo - beta) / alpha, hi = (pc.hi - beta) / alpha;
        q.lo = std::min(lo, hi);
        q.hi = std::max(lo, hi);
        // p(alpha t + beta) expanded by repeated Horner on linear polynomials
        std::vector<double> comp;
        for (size_t i = pc.poly.size(); i-- > 0;) {
            std::vector<double> next(comp.size() + 1, 0.0);
            for (size_t j = 0; j < comp.size(); ++j) {
                next[j] += comp[j] * beta;
                next[j + 1] += comp[j] * alpha;
            }
            next[0] += pc.poly[i];
            comp = std::move(next);
        }
        for (double& x : comp) x *= a;
        comp.resize(std::max<size_t>(comp.size(), 3), 0.0);
        comp[0] += d;
        comp[1] += c;
        comp[2] += b;
        q.poly = comp;
        for (const auto& e : pc.exps) q.exps.push_back({a * e.a * std::exp(e.b * beta), e.b * alpha});
        for (const auto& tr : pc.trigs) q.trigs.push_back({a * tr.a, tr.b * alpha, tr.b * beta + tr.c});
        out.push_back(std::move(q));
    }
    if (alpha < 0) std::reverse(out.begin(), out.end());
    AffineRecord rec{a, b, c, d, alpha, beta};
    return {BoundaryFunction(std::move(out), bf.eps_inf() / std::abs(alpha)), rec};
}

BoundaryFunction minimize_variant(const BoundaryFunction& bf) {
    std::vector<Piece> out = bf.pieces();
    for (auto& pc : out) {
        for (double& x : pc.poly) x = -x;
        for (auto& e : pc.exps) e.a = -e.a;
        for (auto& tr : pc.trigs) tr.a = -tr.a;
    }
    return BoundaryFunction(std::move(out), bf.eps_inf());
}

}  // namespace bellman
