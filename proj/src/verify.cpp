#include "bellman/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

#include "bellman/optimizers.hpp"

namespace bellman {

bool PropertyReport::pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const CheckEntry& e) { return e.pass; });
}

void PropertyReport::add(const std::string& name, double value, double threshold, const std::string& detail) {
    entries.push_back({name, value, threshold, value <= threshold, detail});
}

void PropertyReport::print(std::ostream& os) const {
    for (const auto& e : entries) {
        os << (e.pass ? "PASS " : "FAIL ") << std::left << std::setw(28) << e.name << std::right
           << std::setprecision(6) << std::setw(14) << e.value << " <= " << e.threshold;
        if (!e.detail.empty()) os << "  " << e.detail;
        os << '\n';
    }
}

nlohmann::json PropertyReport::to_json() const {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& e : entries)
        a.push_back({{"name", e.name}, {"value", e.value}, {"threshold", e.threshold}, {"pass", e.pass},
                     {"detail", e.detail}});
    return {{"pass", pass()}, {"checks", a}};
}

Point random_strip_point(std::mt19937_64& rng, double lo, double hi, double eps) {
    std::uniform_real_distribution<double> U(0, 1);
    double t = lo + (hi - lo) * U(rng);
    return {t, t * t + eps * eps * U(rng)};
}

double boundary_defect(const BellmanCandidate& bc, double lo, double hi, int n) {
    double worst = 0;
    for (int i = 0; i < n; ++i) {
        double t = lo + (hi - lo) * (i + 0.5) / n;
        double f = bc.bf().d(0, t);
        worst = std::max(worst, std::abs(bc.eval(lower_point(t)).B - f) / (1 + std::abs(f)));
    }
    return worst;
}

int locate_failures(const BellmanCandidate& bc, double lo, double hi, int n, std::mt19937_64& rng) {
    int bad = 0;
    for (int i = 0; i < n; ++i) {
        try {
            bc.locate(random_strip_point(rng, lo, hi, bc.eps()));
        } catch (const Error&) {
            ++bad;
        }
    }
    return bad;
}

namespace {

bool in_strip(const Point& x, double eps) {
    double h = x.x2 - x.x1 * x.x1;
    return h >= 0 && h <= eps * eps;
}

// the segment lies in the strip
bool segment_inside(const Point& y, const Point& z, double eps) {
    if (!in_strip(y, eps) || !in_strip(z, eps)) return false;
    double dt = z.x1 - y.x1;
    if (dt == 0) return true;
    double k = (z.x2 - y.x2) / dt;
    double t = 0.5 * k;
    if (t <= std::min(y.x1, z.x1) || t >= std::max(y.x1, z.x1)) return true;
    return t * t + eps * eps >= y.x2 + k * (t - y.x1);
}

}  // namespace

double concavity_defect(const BellmanCandidate& bc, double lo, double hi, int n, std::mt19937_64& rng) {
    const double eps = bc.eps();
    std::uniform_real_distribution<double> U(0, 1);
    double worst = -inf;
    for (int i = 0; i < n; ++i) {
        Point x = random_strip_point(rng, lo, hi, eps);
        double th = 2 * std::acos(-1.0) * U(rng);
        // directions spread over slopes comparable to the parabola near x
        double dx = std::cos(th), dy = std::sin(th) * (1 + 2 * std::abs(x.x1));
        auto at = [&](double s) { return std::pair<Point, Point>{{x.x1 - s * dx, x.x2 - s * dy}, {x.x1 + s * dx, x.x2 + s * dy}}; };
        double a = 0, b = 2 * eps;
        for (int it = 0; it < 60; ++it) {
            double m = 0.5 * (a + b);
            auto [y, z] = at(m);
            (segment_inside(y, z, eps) ? a : b) = m;
        }
        if (a <= 0) continue;
        auto [y, z] = at(a * U(rng));
        double Bm = bc.eval(x).B;
        double d = (0.5 * (bc.eval(y).B + bc.eval(z).B) - Bm) / (1 + std::abs(Bm));
        worst = std::max(worst, d);
    }
    return worst;
}

std::vector<Interface> candidate_interfaces(const BellmanCandidate& bc) {
    std::vector<Interface> out;
    const FoliationGraph& g = bc.graph;
    const double eps = g.eps;
    std::function<void(const Stack&)> stack = [&](const Stack& s) {
        if (s.base) {
            for (const auto& sub : s.base->stacks) stack(sub);
            if (s.table->seed.b > s.table->seed.a) out.push_back(chord_interface(s.table->seed.a, s.table->seed.b));
        }
        if (s.chord.b > s.chord.a) out.push_back(chord_interface(s.chord.a, s.chord.b));
    };
    for (size_t i = 0; i < g.chain.size(); ++i) {
        const Node& nd = g.chain[i];
        switch (nd.kind) {
            case NodeKind::long_chord:
            case NodeKind::trolleybus_r:
            case NodeKind::trolleybus_l:
            case NodeKind::birdie: stack(nd.stack); break;
            case NodeKind::multicup:
                for (const auto& s : nd.chords) stack(s);
                break;
            default: break;
        }
        if (i + 1 < g.chain.size()) {
            Side s = g.edge_side(i);
            for (double u : {g.edge_lo(i), g.edge_hi(i)})
                if (std::isfinite(u)) out.push_back(tangent_interface(u, s, eps));
        }
    }
    return out;
}

double gradient_jump(const BellmanCandidate& bc, int samples) {
    double worst = 0;
    for (const auto& itf : candidate_interfaces(bc)) {
        double vx = itf.q.x1 - itf.p.x1, vy = itf.q.x2 - itf.p.x2;
        double len = std::hypot(vx, vy);
        if (len <= 0) continue;
        double nx = -vy / len, ny = vx / len;
        for (int i = 1; i < samples; ++i) {
            double s = double(i) / samples;
            Point x{itf.p.x1 + s * vx, itf.p.x2 + s * vy};
            // the figures on either side, compared on the border itself
            double d = 1e-7 * (1 + std::abs(x.x1) + std::abs(x.x2));
            Point a{x.x1 + d * nx, x.x2 + d * ny}, b{x.x1 - d * nx, x.x2 - d * ny};
            if (!in_strip(a, bc.eps()) || !in_strip(b, bc.eps())) continue;
            int fa = bc.locate(a), fb = bc.locate(b);
            if (fa == fb) continue;
            Eval ea = bc.figures[fa].eval(x), eb = bc.figures[fb].eval(x);
            double scale = 1 + std::hypot(ea.g1, ea.g2);
            worst = std::max(worst, std::hypot(ea.g1 - eb.g1, ea.g2 - eb.g2) / scale);
        }
    }
    return worst;
}

double monge_ampere_residual(const BellmanCandidate& bc, double lo, double hi, int n, std::mt19937_64& rng) {
    const double eps = bc.eps();
    double worst = 0;
    int done = 0;
    for (int tries = 0; done < n && tries < 20 * n; ++tries) {
        Point x = random_strip_point(rng, lo, hi, eps);
        double d = 1e-6 * eps;
        Point st[4] = {{x.x1 + d, x.x2}, {x.x1 - d, x.x2}, {x.x1, x.x2 + d}, {x.x1, x.x2 - d}};
        int fig;
        try {
            fig = bc.locate(x);
            bool same = true;
            for (const auto& p : st) same = same && in_strip(p, eps) && bc.locate(p) == fig;
            if (!same) continue;
        } catch (const Error&) {
            continue;
        }
        const FigureCandidate& F = bc.figures[fig];
        Eval e[4];
        for (int k = 0; k < 4; ++k) e[k] = F.eval(st[k]);
        Eval c = F.eval(x);
        double h11 = (e[0].g1 - e[1].g1) / (2 * d), h21 = (e[0].g2 - e[1].g2) / (2 * d);
        double h12 = (e[2].g1 - e[3].g1) / (2 * d), h22 = (e[2].g2 - e[3].g2) / (2 * d);
        double det = h11 * h22 - h12 * h21;
        double s = 1e-6 * (1 + std::hypot(c.g1, c.g2));
        double norm2 = h11 * h11 + h12 * h12 + h21 * h21 + h22 * h22;
        worst = std::max(worst, std::abs(det) / (norm2 + s * s));
        ++done;
    }
    return worst;
}

OptimizerStats optimizer_check(const BellmanCandidate& bc, double lo, double hi, int n, std::mt19937_64& rng) {
    OptimizerStats st;
    for (int i = 0; i < n; ++i) {
        Point x = random_strip_point(rng, lo, hi, bc.eps());
        ++st.points;
        try {
            Optimizer phi = optimizer_at(bc, x);
            OptimizerReport r = verify_optimizer(phi, x, bc);
            st.mean_error = std::max(st.mean_error, r.mean_error);
            st.square_error = std::max(st.square_error, r.square_error);
            st.f_error = std::max(st.f_error, r.f_error / (1 + std::abs(r.B)));
            st.bmo_excess = std::max(st.bmo_excess, r.bmo_excess / bc.eps());
            if (!r.pass) {
                ++st.failures;
                if (st.first_problem.empty()) {
                    std::ostringstream os;
                    os.precision(17);
                    os << "x = (" << x.x1 << ", " << x.x2 << "): mean " << r.mean_error << ", square "
                       << r.square_error << ", f " << r.f_error << ", bmo " << r.bmo;
                    st.first_problem = os.str();
                }
            }
        } catch (const Error& e) {
            ++st.errors;
            if (st.first_problem.empty()) st.first_problem = e.what();
        }
    }
    return st;
}

PropertyReport run_properties(const BellmanCandidate& bc, const PropertyOptions& opt) {
    PropertyReport rep;
    std::mt19937_64 rng(opt.seed);
    const double lo = opt.x_lo, hi = opt.x_hi;
    rep.add("admissible graph", check_admissible(bc.graph).pass() ? 0 : 1, 0, check_admissible(bc.graph).failures());
    rep.add("boundary condition", boundary_defect(bc, lo, hi, opt.boundary_points), opt.boundary_tol);
    int lost = locate_failures(bc, lo, hi, opt.locate_points, rng);
    rep.add("points located", lost, 0, std::to_string(opt.locate_points) + " random points");
    rep.add("midpoint concavity", std::max(0.0, concavity_defect(bc, lo, hi, opt.segments, rng)), opt.concavity_tol,
            std::to_string(opt.segments) + " segments");
    rep.add("gradient continuity", gradient_jump(bc, opt.interface_samples), opt.gradient_tol,
            std::to_string(candidate_interfaces(bc).size()) + " borders");
    rep.add("monge-ampere residual", monge_ampere_residual(bc, lo, hi, opt.monge_ampere_points, rng),
            opt.monge_ampere_tol);
    if (opt.optimizer_points > 0) {
        OptimizerStats st = optimizer_check(bc, lo, hi, opt.optimizer_points, rng);
        rep.add("optimizer certificates", st.failures + st.errors, 0,
                std::to_string(st.points) + " points" + (st.first_problem.empty() ? "" : "; " + st.first_problem));
    }
    return rep;
}

}  // namespace bellman
