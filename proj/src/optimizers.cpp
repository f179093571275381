#include "bellman/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace bellman {

using nlohmann::json;

double OptimizerPiece::eval(double tau) const {
    if (!is_log) return value;
    return sign * scale * std::log(std::abs(tau - tau0)) + offset;
}

double Optimizer::eval(double tau) const {
    for (const auto& p : pieces)
        if (tau <= p.hi) return p.eval(tau);
    return pieces.back().eval(tau);
}

Optimizer Optimizer::placed(double a, double b) const {
    Optimizer o;
    o.path = path;
    double k = b - a;
    for (auto p : pieces) {
        p.lo = a + k * p.lo;
        p.hi = a + k * p.hi;
        if (p.is_log) {
            p.tau0 = a + k * p.tau0;
            p.offset -= p.sign * p.scale * std::log(k);
        }
        o.pieces.push_back(p);
    }
    return o;
}

Optimizer Optimizer::reversed() const {
    Optimizer o;
    o.path = path;
    for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) {
        OptimizerPiece p = *it;
        double lo = 1 - p.hi, hi = 1 - p.lo;
        p.lo = lo;
        p.hi = hi;
        p.tau0 = 1 - p.tau0;
        o.pieces.push_back(p);
    }
    return o;
}

Optimizer Optimizer::constant(double c) {
    Optimizer o;
    OptimizerPiece p;
    p.lo = 0;
    p.hi = 1;
    p.value = c;
    o.pieces.push_back(p);
    return o;
}

Optimizer concat(const std::vector<std::pair<double, Optimizer>>& parts) {
    Optimizer o;
    double pos = 0;
    for (const auto& [w, part] : parts) {
        if (!(w > 0)) continue;
        Optimizer q = part.placed(pos, pos + w);
        for (auto& p : q.pieces)
            if (p.hi > p.lo) o.pieces.push_back(p);
        for (int f : part.path)
            if (std::find(o.path.begin(), o.path.end(), f) == o.path.end()) o.path.push_back(f);
        pos += w;
    }
    if (o.pieces.empty()) throw Error(Fault::synthesis_failure, "empty concatenation");
    o.pieces.front().lo = 0;
    o.pieces.back().hi = 1;
    return o;
}

namespace {

// primitives in y = |tau - tau0| of (Phi - k) and of Phi^2 - 2 k Phi + 2 k^2, Phi = k log y + d
double prim1(double y, double k, double d) {
    if (y <= 0) return 0;
    double P = k * std::log(y) + d;
    return y * (P - k);
}

double prim2(double y, double k, double d) {
    if (y <= 0) return 0;
    double P = k * std::log(y) + d;
    return y * (P * P - 2 * k * P + 2 * k * k);
}

}  // namespace

Moments moments(const Optimizer& phi, double a, double b, double shift) {
    Moments m;
    for (const auto& p : phi.pieces) {
        double lo = std::max(a, p.lo), hi = std::min(b, p.hi);
        if (!(hi > lo)) continue;
        double L = hi - lo;
        m.m0 += L;
        if (!p.is_log) {
            double c = p.value - shift;
            m.m1 += L * c;
            m.m2 += L * c * c;
            continue;
        }
        double y1 = std::abs(lo - p.tau0), y2 = std::abs(hi - p.tau0);
        if (y1 > y2) std::swap(y1, y2);
        double k = p.sign * p.scale, d = p.offset - shift;
        m.m1 += prim1(y2, k, d) - prim1(y1, k, d);
        m.m2 += prim2(y2, k, d) - prim2(y1, k, d);
    }
    return m;
}

double f_integral(const Optimizer& phi, const BoundaryFunction& bf, double a, double b) {
    double s = 0;
    for (const auto& p : phi.pieces) {
        double lo = std::max(a, p.lo), hi = std::min(b, p.hi);
        if (!(hi > lo)) continue;
        if (!p.is_log) {
            s += (hi - lo) * bf.d(0, p.value);
            continue;
        }
        double y1 = std::abs(lo - p.tau0), y2 = std::abs(hi - p.tau0);
        if (y1 > y2) std::swap(y1, y2);
        double k = p.scale;
        auto val = [&](double y) { return y > 0 ? p.sign * k * std::log(y) + p.offset : -p.sign * inf; };
        double t1 = val(y1), t2 = val(y2);
        if (p.sign > 0)
            s += bf.weighted(0, 1 / k, t1, t2, p.offset) / k;
        else
            s += bf.weighted(0, -1 / k, t2, t1, p.offset) / k;
    }
    return s;
}

double BmoNorm::norm() const { return std::sqrt(std::max(0.0, sup_variance)); }

namespace {

double variance(const Optimizer& phi, double s, double t) {
    if (!(t > s)) return 0;
    double mid = phi.eval(0.5 * (s + t));
    Moments m = moments(phi, s, t, std::isfinite(mid) ? mid : 0);
    double e1 = m.m1 / m.m0;
    return std::max(0.0, m.m2 / m.m0 - e1 * e1);
}

template <class F>
double golden_max(F f, double a, double b, double& arg) {
    const double g = 0.5 * (std::sqrt(5.0) - 1);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 60 && b - a > 1e-15 * (1 + std::abs(b)); ++it) {
        if (fc < fd) {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        }
    }
    arg = fc > fd ? c : d;
    return std::max(fc, fd);
}

}  // namespace

BmoNorm bmo_norm(const Optimizer& phi) {
    std::vector<double> pts = {0, 1};
    for (const auto& p : phi.pieces) {
        pts.push_back(p.lo);
        pts.push_back(p.hi);
        const int k = 15;
        if (!p.is_log) {
            for (int i = 1; i < k; ++i) pts.push_back(p.lo + (p.hi - p.lo) * i / k);
            continue;
        }
        double ylo = std::abs(p.lo - p.tau0), yhi = std::abs(p.hi - p.tau0);
        double dir = p.hi - p.tau0 >= 0 ? 1 : -1;
        double near = std::min(ylo, yhi), far = std::max(ylo, yhi);
        if (near <= 0) near = far * 1e-12;
        for (int i = 1; i < k; ++i) {
            double y = near * std::pow(far / near, double(i) / k);
            pts.push_back(p.tau0 + dir * y);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    struct Cand {
        double v;
        size_t i, j;
    };
    std::vector<Cand> best;
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j) best.push_back({variance(phi, pts[i], pts[j]), i, j});
    std::sort(best.begin(), best.end(), [](const Cand& a, const Cand& b) { return a.v > b.v; });
    BmoNorm r;
    if (best.empty()) return r;
    r.grid_variance = best.front().v;
    r.sup_variance = best.front().v;
    r.s = pts[best.front().i];
    r.t = pts[best.front().j];
    for (size_t c = 0; c < std::min<size_t>(6, best.size()); ++c) {
        size_t i = best[c].i, j = best[c].j;
        double s = pts[i], t = pts[j];
        double s_lo = i > 0 ? pts[i - 1] : 0, s_hi = pts[i + 1];
        double t_lo = pts[j - 1], t_hi = j + 1 < pts.size() ? pts[j + 1] : 1;
        double v = best[c].v;
        for (int round = 0; round < 8; ++round) {
            double arg;
            double vs = golden_max([&](double x) { return variance(phi, x, t); }, s_lo, std::min(s_hi, t), arg);
            if (vs > v) {
                v = vs;
                s = arg;
            }
            double vt = golden_max([&](double x) { return variance(phi, s, x); }, std::max(t_lo, s), t_hi, arg);
            if (vt > v) {
                v = vt;
                t = arg;
            }
        }
        if (v > r.sup_variance) {
            r.sup_variance = v;
            r.s = s;
            r.t = t;
        }
    }
    return r;
}

// ---------------------------------------------------------------- synthesis

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

struct Step {
    double value, weight;
};

Optimizer from_steps(std::vector<Step> steps) {
    std::sort(steps.begin(), steps.end(), [](const Step& a, const Step& b) { return a.value < b.value; });
    std::vector<std::pair<double, Optimizer>> parts;
    double total = 0;
    for (const auto& s : steps) total += std::max(0.0, s.weight);
    for (const auto& s : steps)
        if (s.weight > 0) parts.push_back({s.weight / total, Optimizer::constant(s.value)});
    return concat(parts);
}

// steps for a point of the lower polyline at abscissa t lying on the given chord (or an arc when null)
void polyline_steps(std::vector<Step>& out, double t, const Chord* c, double weight) {
    if (!c || c->b - c->a <= 0) {
        out.push_back({t, weight});
        return;
    }
    double th = std::clamp((c->b - t) / (c->b - c->a), 0.0, 1.0);
    out.push_back({c->a, weight * th});
    out.push_back({c->b, weight * (1 - th)});
}

class Synth {
public:
    explicit Synth(const BellmanCandidate& bc) : bc_(bc), eps_(bc.eps()) {}

    Optimizer run(int fig, const Point& x, int depth = 0) {
        if (depth > 200) throw Error(Fault::synthesis_failure, "optimizer recursion too deep at figure " + std::to_string(fig));
        if (fig < 0) throw Error(Fault::synthesis_failure, "missing incoming figure");
        Optimizer o = build(fig, x, depth);
        o.path.insert(o.path.begin(), fig);
        return o;
    }

    // non-decreasing version of the figure's optimizer
    Optimizer increasing(int fig, const Point& x, int depth) {
        Optimizer o = run(fig, x, depth);
        return direction(fig) < 0 ? o.reversed() : o;
    }
    Optimizer decreasing(int fig, const Point& x, int depth) {
        Optimizer o = run(fig, x, depth);
        return direction(fig) > 0 ? o.reversed() : o;
    }

private:
    const BellmanCandidate& bc_;
    double eps_;

    int direction(int fig) const {
        auto k = bc_.figures[fig].kind;
        return k == FigureKind::tangent_l || k == FigureKind::trolleybus_l ? -1 : 1;
    }

    [[noreturn]] void failure(int fig, const std::string& what) const {
        throw Error(Fault::synthesis_failure, "figure " + std::to_string(fig) + " (" +
                                                  figure_kind_name(bc_.figures[fig].kind) + "): " + what);
    }

    static OptimizerPiece log_piece(double lo, double hi, int sign, double scale, double offset) {
        OptimizerPiece p;
        p.is_log = true;
        p.lo = lo;
        p.hi = hi;
        p.sign = sign;
        p.scale = scale;
        p.tau0 = 0;
        p.offset = offset;
        return p;
    }

    Optimizer build(int fig, const Point& x, int depth) {
        const FigureCandidate& F = bc_.figures[fig];
        const FigureLinks& lk = bc_.links[fig];
        switch (F.kind) {
            case FigureKind::tangent_r:
            case FigureKind::tangent_l: return tangent(F, lk, x, depth);
            case FigureKind::chordal: {
                Chord c = F.chord_through(x);
                if (c.b - c.a <= 1e-15 * (1 + std::abs(c.a))) return Optimizer::constant(x.x1);
                double th = std::clamp((c.b - x.x1) / (c.b - c.a), 0.0, 1.0);
                return from_steps({{c.a, th}, {c.b, 1 - th}});
            }
            case FigureKind::angle: return angle(fig, F.w, x, lk.in_right, lk.in_left, depth, nullptr);
            case FigureKind::trolleybus_r: return trolley_r(fig, F, lk, x, depth);
            case FigureKind::trolleybus_l: return trolley_l(fig, F, lk, x, depth);
            case FigureKind::birdie: {
                double uR = tangent_point(x, Side::right, eps_);
                if (uR <= F.chord.b + 1e-13 * (1 + std::abs(F.chord.b))) return trolley_r(fig, F, lk, x, depth);
                return angle(fig, F.chord.b, x, lk.in_right, lk.in_left, depth, &F);
            }
            case FigureKind::multicup: return multicup(fig, F, x);
            case FigureKind::closed_multicup: return closed_multicup(fig, F, x);
        }
        failure(fig, "unknown figure");
    }

    Optimizer tangent(const FigureCandidate& F, const FigureLinks& lk, const Point& x, int depth) {
        bool right = F.kind == FigureKind::tangent_r;
        double u = std::clamp(tangent_point(x, right ? Side::right : Side::left, eps_), F.u1, F.u2);
        double mu = right ? (u - x.x1) / eps_ : (x.x1 - u) / eps_;
        if (mu <= 1e-15) return Optimizer::constant(x.x1);
        mu = std::min(mu, 1.0);
        double start = right ? F.u1 : F.u2;  // anchored end
        double lr = right ? (u - start) / eps_ : (start - u) / eps_;
        Optimizer head;
        if (lk.source < 0 || !std::isfinite(start) || lr > 600) {
            head.pieces.push_back(log_piece(0, 1, right ? 1 : -1, eps_, u));
        } else {
            Point anchor = upper_point(right ? start - eps_ : start + eps_, eps_);
            Optimizer psi = right ? increasing(lk.source, anchor, depth + 1) : decreasing(lk.source, anchor, depth + 1);
            double r = std::exp(-lr);
            head = psi.placed(0, r);
            if (r < 1) head.pieces.push_back(log_piece(r, 1, right ? 1 : -1, eps_, u));
            head.pieces.back().hi = 1;
        }
        if (mu >= 1) return head;
        return concat({{mu, head}, {1 - mu, Optimizer::constant(u)}});
    }

    Optimizer angle(int fig, double w, const Point& x, int in_r, int in_l, int depth, const FigureCandidate* birdie) {
        double S = (x.x2 - 2 * w * x.x1 + w * w) / (2 * eps_ * eps_);
        double D = (x.x1 - w) / eps_;
        double a1 = 0.5 * (S - D), a3 = 0.5 * (S + D), a2 = 1 - S;
        const double tol = 1e-9;
        if (a1 < -tol || a2 < -tol || a3 < -tol)
            failure(fig, "point outside the angle: weights " + fmt(a1) + ", " + fmt(a2) + ", " + fmt(a3));
        a1 = std::max(a1, 0.0);
        a2 = std::max(a2, 0.0);
        a3 = std::max(a3, 0.0);
        double sum = a1 + a2 + a3;
        a1 /= sum;
        a2 /= sum;
        a3 /= sum;
        std::vector<std::pair<double, Optimizer>> parts;
        if (a1 > 0) {
            Point P = upper_point(w - eps_, eps_);
            Optimizer psi = birdie ? trolley_r(fig, *birdie, bc_.links[fig], P, depth + 1)
                                   : increasing(in_r, P, depth + 1);
            parts.push_back({a1, psi});
        }
        parts.push_back({a2, Optimizer::constant(w)});
        if (a3 > 0) parts.push_back({a3, decreasing(in_l, upper_point(w + eps_, eps_), depth + 1).reversed()});
        return concat(parts);
    }

    // x = alpha0 P0 + alpha1 A + alpha2 B
    std::array<double, 3> barycentric(int fig, const Point& P0, const Point& A, const Point& B, const Point& x) {
        Eigen::Matrix3d M;
        M << P0.x1, A.x1, B.x1, P0.x2, A.x2, B.x2, 1, 1, 1;
        Eigen::Vector3d rhs(x.x1, x.x2, 1);
        Eigen::Vector3d al = M.colPivHouseholderQr().solve(rhs);
        for (int i = 0; i < 3; ++i)
            if (al[i] < -1e-8) failure(fig, "point outside the trolleybus triangle, weight " + fmt(al[i]));
        std::array<double, 3> r;
        double s = 0;
        for (int i = 0; i < 3; ++i) s += (r[i] = std::max(0.0, al[i]));
        for (auto& v : r) v /= s;
        return r;
    }

    Optimizer trolley_r(int fig, const FigureCandidate& F, const FigureLinks& lk, const Point& x, int depth) {
        double a = F.chord.a, b = F.chord.b;
        Point P0 = upper_point(a - eps_, eps_);
        auto al = barycentric(fig, P0, lower_point(a), lower_point(b), x);
        std::vector<std::pair<double, Optimizer>> parts;
        if (al[0] > 0) parts.push_back({al[0], increasing(lk.in_right, P0, depth + 1)});
        parts.push_back({al[1], Optimizer::constant(a)});
        parts.push_back({al[2], Optimizer::constant(b)});
        return concat(parts);
    }

    Optimizer trolley_l(int fig, const FigureCandidate& F, const FigureLinks& lk, const Point& x, int depth) {
        double a = F.chord.a, b = F.chord.b;
        Point P0 = upper_point(b + eps_, eps_);
        auto al = barycentric(fig, P0, lower_point(b), lower_point(a), x);
        std::vector<std::pair<double, Optimizer>> parts;
        if (al[0] > 0) parts.push_back({al[0], decreasing(lk.in_left, P0, depth + 1)});
        parts.push_back({al[1], Optimizer::constant(b)});
        parts.push_back({al[2], Optimizer::constant(a)});
        return concat(parts);
    }

    // lower boundary of the convex hull of the upper region and the multicup ends
    double hull_floor(const FigureCandidate& F, double t) const {
        double p = F.arcs.front().lo, q = F.arcs.back().hi, e = eps_;
        if (std::isfinite(p) && t >= p - e && t <= p) return p * p + 2 * (p - e) * (t - p);
        if (std::isfinite(p) && t > p && t <= p + e) return p * p + 2 * (p + e) * (t - p);
        if (std::isfinite(q) && t >= q - e && t <= q) return q * q + 2 * (q - e) * (t - q);
        if (std::isfinite(q) && t > q && t <= q + e) return q * q + 2 * (q + e) * (t - q);
        return t * t + e * e;
    }

    bool on_parabola(const FigureCandidate& F, double t) const {
        double p = F.arcs.front().lo, q = F.arcs.back().hi;
        double e = eps_ * (1 - 1e-12);
        return !(std::isfinite(p) && std::abs(t - p) < e) && !(std::isfinite(q) && std::abs(t - q) < e);
    }

    struct Hit {
        double t;
        const Chord* chord;
    };

    std::vector<Hit> line_hits(const FigureCandidate& F, const Point& x, double k) const {
        std::vector<Hit> hits;
        double c0 = k * x.x1 - x.x2;
        double disc = std::max(0.0, k * k - 4 * c0);
        for (const auto& arc : F.arcs) {
            if (arc.hi <= arc.lo) continue;
            for (double sg : {-1.0, 1.0}) {
                double t = 0.5 * (k + sg * std::sqrt(disc));
                double tol = 1e-12 * (1 + std::abs(t));
                if (t >= arc.lo - tol && t <= arc.hi + tol) hits.push_back({t, nullptr});
            }
        }
        for (const auto& c : F.chords) {
            double den = c.a + c.b - k;
            if (std::abs(den) < 1e-300) continue;
            double t = (c.a * c.b + x.x2 - k * x.x1) / den;
            double tol = 1e-12 * (1 + std::abs(t));
            if (t >= c.a - tol && t <= c.b + tol) hits.push_back({std::clamp(t, c.a, c.b), &c});
        }
        return hits;
    }

    Optimizer multicup(int fig, const FigureCandidate& F, const Point& x) {
        double R = x.x1 * x.x1 + eps_ * eps_ - x.x2;
        double r = std::sqrt(std::max(0.0, R));
        double k_lo = -inf, k_hi = inf;
        // tangents to the upper parabola, in closed form
        if (on_parabola(F, x.x1 - r)) k_lo = 2 * (x.x1 - r);
        if (on_parabola(F, x.x1 + r)) k_hi = 2 * (x.x1 + r);
        std::vector<double> cand;
        for (double e : {F.arcs.front().lo, F.arcs.back().hi})
            if (std::isfinite(e))
                for (double d : {-eps_, 0.0, eps_}) cand.push_back(e + d);
        for (double t : cand) {
            double s = (hull_floor(F, t) - x.x2) / (t - x.x1);
            if (t < x.x1) k_lo = std::max(k_lo, s);
            if (t > x.x1) k_hi = std::min(k_hi, s);
        }
        if (!std::isfinite(k_lo) || !std::isfinite(k_hi) || k_lo > k_hi + 1e-9 * (1 + std::abs(k_hi)))
            failure(fig, "no separating line through (" + fmt(x.x1) + ", " + fmt(x.x2) + "), slopes " + fmt(k_lo) + " .. " + fmt(k_hi) + ", ends " + fmt(F.arcs.front().lo) + " " + fmt(F.arcs.back().hi));
        double k = 0.5 * (k_lo + k_hi);
        auto hits = line_hits(F, x, k);
        const Hit* y = nullptr;
        const Hit* z = nullptr;
        double tol = 1e-12 * (1 + std::abs(x.x1));
        for (const auto& h : hits) {
            if (h.t <= x.x1 + tol && (!y || h.t > y->t)) y = &h;
            if (h.t >= x.x1 - tol && (!z || h.t < z->t)) z = &h;
        }
        if (!y || !z) failure(fig, "separating line misses the multicup boundary");
        std::vector<Step> steps;
        if (z->t - y->t <= 1e-14 * (1 + std::abs(x.x1))) {
            polyline_steps(steps, y->t, y->chord, 1);
        } else {
            double lam = (z->t - x.x1) / (z->t - y->t);
            polyline_steps(steps, y->t, y->chord, lam);
            polyline_steps(steps, z->t, z->chord, 1 - lam);
        }
        return from_steps(steps);
    }

    Optimizer closed_multicup(int fig, const FigureCandidate& F, const Point& x) {
        double p = F.chord.a, q = F.chord.b;
        Point P = lower_point(p);
        double d1 = x.x1 - P.x1, d2 = x.x2 - P.x2;
        if (std::hypot(d1, d2) <= 1e-15 * (1 + std::abs(p))) return Optimizer::constant(p);
        double best = inf;
        const Chord* where = nullptr;
        for (const auto& arc : F.arcs) {
            if (arc.hi <= arc.lo || d1 == 0) continue;
            double s = (d2 - 2 * p * d1) / (d1 * d1);
            double t = p + s * d1;
            double tol = 1e-12 * (1 + std::abs(t));
            if (s >= 1 - 1e-12 && t > p + tol && t >= arc.lo - tol && t <= arc.hi + tol && s < best) {
                best = s;
                where = nullptr;
            }
        }
        for (const auto& c : F.chords) {
            // P + s d on the chord line x2 = (a + b) x1 - a b
            double den = d2 - (c.a + c.b) * d1;
            if (std::abs(den) < 1e-300) continue;
            double s = ((c.a + c.b) * p - c.a * c.b - P.x2) / den;
            double t = p + s * d1;
            double tol = 1e-12 * (1 + std::abs(t));
            if (s >= 1 - 1e-12 && t >= c.a - tol && t <= c.b + tol && s < best) {
                best = s;
                where = &c;
            }
        }
        if (!std::isfinite(best)) failure(fig, "ray from the hull end misses the multicup");
        double t = std::clamp(p + best * d1, p, q);
        std::vector<Step> steps;
        steps.push_back({p, 1 - 1 / best});
        polyline_steps(steps, t, where, 1 / best);
        return from_steps(steps);
    }
};

}  // namespace

Optimizer optimizer_at(const BellmanCandidate& bc, const Point& x) {
    int fig = bc.locate(x);
    Synth s(bc);
    return s.run(fig, x);
}

OptimizerReport verify_optimizer(const Optimizer& phi, const Point& x, const BellmanCandidate& bc) {
    OptimizerReport r;
    Moments m = moments(phi, 0, 1, x.x1);
    r.mean_error = std::abs(m.m1);
    r.square_error = std::abs(m.m2 - (x.x2 - x.x1 * x.x1) + 2 * x.x1 * m.m1);
    r.B = bc.eval(x).B;
    r.f_average = f_integral(phi, bc.bf());
    r.f_error = std::abs(r.f_average - r.B);
    BmoNorm n = bmo_norm(phi);
    r.bmo = n.norm();
    r.bmo_excess = r.bmo - bc.eps();
    r.pass = r.mean_error <= 1e-9 * (1 + std::abs(x.x1)) && r.square_error <= 1e-9 * (1 + std::abs(x.x2)) &&
             r.f_error <= 1e-7 * (1 + std::abs(r.B)) && r.bmo <= bc.eps() * (1 + 1e-8);
    return r;
}

DeliveryCurve delivery_curve(const Optimizer& phi, const BellmanCandidate& bc, int samples) {
    DeliveryCurve c;
    const double eps = bc.eps();
    std::vector<double> taus;
    for (int i = 30; i >= 1; --i) taus.push_back(std::ldexp(1.0, -i) / samples);
    for (int i = 1; i <= samples; ++i) taus.push_back(double(i) / samples);
    for (double tau : taus) {
        Moments m = moments(phi, 0, tau);
        Point g{m.m1 / tau, m.m2 / tau};
        double run = f_integral(phi, bc.bf(), 0, tau) / tau;
        c.tau.push_back(tau);
        c.gamma.push_back(g);
        c.running_f.push_back(run);
        double out = std::max({0.0, g.x1 * g.x1 - g.x2, g.x2 - g.x1 * g.x1 - eps * eps});
        c.strip_violation = std::max(c.strip_violation, out);
        double B = std::nan("");
        if (out <= 1e-10 * (1 + std::abs(g.x2))) {
            Point gc{g.x1, std::clamp(g.x2, g.x1 * g.x1, g.x1 * g.x1 + eps * eps)};
            B = bc.eval(gc).B;
            c.bellman_mismatch = std::max(c.bellman_mismatch, std::abs(B - run) / (1 + std::abs(B)));
        }
        c.bellman.push_back(B);
    }
    std::vector<Point> pts = c.gamma;
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x1 < b.x1; });
    double prev_slope = -inf;
    for (size_t i = 1; i < pts.size(); ++i) {
        double dx = pts[i].x1 - pts[i - 1].x1;
        if (dx <= 1e-9 * (1 + std::abs(pts[i].x1))) continue;
        double s = (pts[i].x2 - pts[i - 1].x2) / dx;
        if (s < prev_slope - 1e-6 * (1 + std::abs(s))) c.convex = false;
        prev_slope = std::max(prev_slope, s);
    }
    return c;
}

namespace {

json num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double get_num(const json& j) {
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s == "inf") return inf;
        if (s == "-inf") return -inf;
        throw Error(Fault::input, "bad number '" + s + "'");
    }
    return j.get<double>();
}

}  // namespace

json optimizer_to_json(const Optimizer& phi) {
    json pieces = json::array();
    for (const auto& p : phi.pieces) {
        if (p.is_log)
            pieces.push_back({{"type", "log"}, {"lo", p.lo}, {"hi", p.hi}, {"sign", p.sign}, {"scale", p.scale},
                              {"tau0", p.tau0}, {"offset", num(p.offset)}});
        else
            pieces.push_back({{"type", "const"}, {"lo", p.lo}, {"hi", p.hi}, {"value", num(p.value)}});
    }
    return {{"pieces", pieces}, {"path", phi.path}};
}

Optimizer optimizer_from_json(const json& j) {
    Optimizer o;
    try {
        for (const auto& p : j.at("pieces")) {
            OptimizerPiece q;
            q.lo = p.at("lo").get<double>();
            q.hi = p.at("hi").get<double>();
            if (p.at("type").get<std::string>() == "log") {
                q.is_log = true;
                q.sign = p.at("sign").get<int>();
                q.scale = p.at("scale").get<double>();
                q.tau0 = p.at("tau0").get<double>();
                q.offset = get_num(p.at("offset"));
            } else {
                q.value = get_num(p.at("value"));
            }
            o.pieces.push_back(q);
        }
        if (j.contains("path")) o.path = j.at("path").get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw Error(Fault::input, std::string("malformed optimizer: ") + e.what());
    }
    return o;
}

void write_optimizer_csv(std::ostream& os, const Optimizer& phi, int samples) {
    os.precision(17);
    os << "tau,phi\n";
    for (int i = 0; i <= samples; ++i) {
        double tau = (i + 0.5) / (samples + 1);
        os << tau << ',' << phi.eval(tau) << '\n';
    }
}

void write_delivery_csv(std::ostream& os, const DeliveryCurve& c) {
    os.precision(17);
    os << "tau,gamma1,gamma2,running_f,B\n";
    for (size_t i = 0; i < c.tau.size(); ++i)
        os << c.tau[i] << ',' << c.gamma[i].x1 << ',' << c.gamma[i].x2 << ',' << c.running_f[i] << ','
           << c.bellman[i] << '\n';
}

}  // namespace bellman
