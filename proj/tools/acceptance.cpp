// One line per acceptance criterion: PASS/FAIL, the measured numbers and the runtime.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bellman/config.hpp"
#include "bellman/evolution.hpp"
#include "bellman/optimizers.hpp"
#include "bellman/oracle.hpp"
#include "bellman/verify.hpp"

using namespace bellman;
namespace fs = std::filesystem;

namespace {

fs::path config_dir = fs::path(BELLMAN_SOURCE_DIR) / "configs";

RunConfig cfg(const std::string& name) { return load_config(config_dir / (name + ".json")); }

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::vector<double> critical_values(const EvolutionTrace& tr) {
    std::vector<double> v;
    for (const auto& c : tr.criticals) v.push_back(c.eps);
    return v;
}

// every expected value is matched within tol and nothing else was reported
void match_criticals(Outcome& o, const EvolutionTrace& tr, const std::vector<double>& want, double tol) {
    auto got = critical_values(tr);
    o.detail << "criticals";
    for (double g : got) o.detail << ' ' << std::setprecision(12) << g;
    double worst = 0;
    for (double w : want) {
        double best = inf;
        for (double g : got) best = std::min(best, std::abs(g - w));
        worst = std::max(worst, best);
    }
    for (double g : got) {
        double best = inf;
        for (double w : want) best = std::min(best, std::abs(g - w));
        o.require(best <= tol, "unexpected critical " + sci(g));
    }
    o.detail << "; max error " << sci(worst);
    o.require(worst <= tol, "critical point off by " + sci(worst));
}

Outcome exponential() {
    Outcome o;
    RunConfig c = cfg("exp");
    std::mt19937_64 rng(2024);
    double worst = 0;
    for (double eps : {0.3, 0.5, 0.9}) {
        auto tr = evolve(c.bf, eps);
        auto bc = assemble(tr.final_graph());
        o.require(tr.criticals.empty(), "criticals at eps " + sci(eps));
        o.require(bc.figures.size() == 1 && bc.figures[0].kind == FigureKind::tangent_l,
                  "not a single left tangent domain at eps " + sci(eps));
        for (int i = 0; i < 100; ++i) {
            Point x = random_strip_point(rng, -4, 2, eps);
            double u = x.x1 - eps + std::sqrt(eps * eps - (x.x2 - x.x1 * x.x1));
            double B = std::exp(u) * (1 + (x.x1 - u) / (1 - eps));
            worst = std::max(worst, std::abs(bc.eval(x).B - B) / std::abs(B));
        }
    }
    o.detail << "single left tangent domain at eps 0.3, 0.5, 0.9; max rel error vs closed form " << sci(worst)
             << " (<= 1e-10)";
    o.require(worst <= 1e-10, "closed form");
    return o;
}

Outcome sextic_positive() {
    Outcome o;
    RunConfig c = cfg("sextic_pos");
    match_criticals(o, evolve(c.bf, 1.0), {std::sqrt(35.0) / 9, 1 / std::sqrt(2.0)}, 1e-6);
    return o;
}

Outcome sextic_negative() {
    Outcome o;
    RunConfig c = cfg("sextic_neg");
    auto tr = evolve(c.bf, 3.0);
    match_criticals(o, tr, {std::sqrt(15.0 / 8), std::sqrt(15.0 / 2)}, 1e-6);
    // both angles touch the cup at the same moment
    bool both = !tr.criticals.empty() && tr.criticals.front().events.size() == 2;
    o.detail << "; simultaneous touch " << (both ? "yes" : "no");
    o.require(both, "eps1 = eps2 not simultaneous");
    return o;
}

Outcome quintic() {
    Outcome o;
    RunConfig c = cfg("quintic");
    match_criticals(o, evolve(c.bf, 1.2), {std::sqrt(1225.0 / 1614), 1.0}, 1e-6);
    return o;
}

Outcome angles() {
    Outcome o;
    RunConfig a = cfg("abs_cubed");
    double wmax = 0;
    for (double eps : {0.2, 0.5, 1.0}) {
        auto g = evolve(a.bf, eps).final_graph();
        bool ok = g.chain.size() == 3 && g.chain[1].kind == NodeKind::angle;
        o.require(ok, "|t|^3 graph at eps " + sci(eps));
        if (ok) wmax = std::max(wmax, std::abs(g.chain[1].w));
    }
    o.detail << "|t|^3 max |w| " << sci(wmax) << " (< 1e-8)";
    o.require(wmax < 1e-8, "|t|^3 balance root");

    RunConfig e = cfg("escaping_angle");
    double worst = 0;
    for (double eps : {0.5, 1.5, 1.9}) {
        auto g = evolve(e.bf, eps).final_graph();
        double want = eps / (eps - 1) * std::log(2 / ((2 - eps) * (1 + eps)));
        bool ok = g.chain.size() == 3 && g.chain[1].kind == NodeKind::angle;
        o.require(ok, "escaping angle missing at eps " + sci(eps));
        if (ok) worst = std::max(worst, std::abs(g.chain[1].w - want));
    }
    auto far = evolve(e.bf, 2.1).final_graph();
    bool absent = true;
    for (const auto& n : far.chain) absent = absent && n.kind != NodeKind::angle;
    o.detail << "; escaping root max error " << sci(worst) << " (<= 1e-6); absent at 2.1: " << (absent ? "yes" : "no");
    o.require(worst <= 1e-6, "escaping root");
    o.require(absent, "angle still present at eps 2.1");
    return o;
}

const std::vector<std::string> examples = {"exp",           "quartic_pos",    "quartic_neg",      "quintic",
                                           "sextic_pos",    "sextic_neg",     "sextic_pos_c05",   "sextic_neg_c05",
                                           "solid_root_cubic", "sine_monster"};

BellmanCandidate example_candidate(const RunConfig& c) { return assemble(evolve(c.bf, c.run_eps()).final_graph()); }

Outcome property_suite() {
    Outcome o;
    double bd = 0, cc = -inf, gj = 0, ma = 0;
    for (const auto& name : examples) {
        RunConfig c = cfg(name);
        auto bc = example_candidate(c);
        PropertyOptions p;
        p.x_lo = c.x_lo;
        p.x_hi = c.x_hi;
        p.segments = 1000;
        p.boundary_points = 1000;
        p.optimizer_points = 0;
        auto rep = run_properties(bc, p);
        for (const auto& e : rep.entries) {
            if (e.name == "boundary condition") bd = std::max(bd, e.value);
            if (e.name == "midpoint concavity") cc = std::max(cc, e.value);
            if (e.name == "gradient continuity") gj = std::max(gj, e.value);
            if (e.name == "monge-ampere residual") ma = std::max(ma, e.value);
            o.require(e.pass, name + ": " + e.name + " = " + sci(e.value));
        }
    }
    o.detail << examples.size() << " examples; boundary " << sci(bd) << " (<= 1e-10), concavity " << sci(cc)
             << " (<= 1e-9), gradient jump " << sci(gj) << " (<= 1e-6), monge-ampere " << sci(ma) << " (<= 1e-6)";
    return o;
}

Outcome optimizers() {
    Outcome o;
    int points = 0, bad = 0;
    double f = 0, mean = 0, excess = -inf;
    for (const auto& name : examples) {
        RunConfig c = cfg(name);
        auto bc = example_candidate(c);
        std::mt19937_64 rng(c.seed + 77);
        auto st = optimizer_check(bc, c.x_lo, c.x_hi, 200, rng);
        points += st.points;
        bad += st.failures + st.errors;
        f = std::max(f, st.f_error);
        mean = std::max({mean, st.mean_error, st.square_error});
        excess = std::max(excess, st.bmo_excess);
        o.require(st.failures + st.errors == 0, name + ": " + st.first_problem);
    }
    o.detail << points << " optimizers, " << bad << " failed; max moment error " << sci(mean)
             << ", max f-average error / (1+|B|) " << sci(f) << " (<= 1e-7), max (bmo - eps) / eps " << sci(excess)
             << " (<= 1e-8)";
    return o;
}

Outcome oracle() {
    Outcome o;
    auto pinned = [](const BellmanCandidate& bc) {
        OracleOptions opt;
        opt.edge = [&bc](const Point& x) { return bc.eval(x).B; };
        return opt;
    };
    {
        RunConfig c = cfg("quadratic");
        auto bc = example_candidate(c);
        auto V = grid_minimal_concave(c.bf, bc.eps(), {-2, 2, bc.eps(), 60, 12});
        auto r = compare(bc, V);
        o.detail << "quadratic abs " << sci(r.max_abs) << " (<= 1e-10)";
        o.require(r.max_abs <= 1e-10, "quadratic");
    }
    double coarse_abs = 0, fine_abs = 0;
    {
        RunConfig c = cfg("exp");
        const double eps = 0.5;
        auto bc = assemble(evolve(c.bf, eps).final_graph());
        auto coarse = compare(bc, grid_minimal_concave(c.bf, eps, {-4, 2, eps, 100, 20}, pinned(bc)));
        auto fine = compare(bc, grid_minimal_concave(c.bf, eps, {-4, 2, eps, 200, 40}, pinned(bc)));
        coarse_abs = coarse.max_abs;
        fine_abs = fine.max_abs;
        o.detail << "; exp 200x40 abs " << sci(fine.max_abs) << " rel " << sci(fine.max_rel) << " (<= 5e-3), V - B <= "
                 << sci(fine.max_excess);
        o.require(fine.max_abs <= 5e-3, "exp deviation");
        o.require(fine.max_excess <= 1e-9, "exp grid above candidate");
    }
    {
        RunConfig c = cfg("sextic_pos");
        const double eps = 0.3;
        auto bc = assemble(evolve(c.bf, eps).final_graph());
        auto r = compare(bc, grid_minimal_concave(c.bf, eps, {-2.5, 2.5, eps, 300, 50}, pinned(bc)));
        o.detail << "; sextic 300x50 rel " << sci(r.max_rel) << " (<= 1e-2), V - B <= " << sci(r.max_excess);
        o.require(r.max_rel <= 1e-2, "sextic deviation");
        o.require(r.max_excess <= 1e-9, "sextic grid above candidate");
    }
    double ratio = coarse_abs / fine_abs;
    o.detail << "; refinement 100x20 -> 200x40 ratio " << sci(ratio) << " (>= 1.8)";
    o.require(ratio >= 1.8, "refinement ratio");
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) config_dir = argv[1];
    struct Criterion {
        int id;
        const char* title;
        double budget;  // seconds
        std::function<Outcome()> run;
    };
    std::vector<Criterion> all = {
        {1, "exponential closed form", 5, exponential},
        {2, "sixth degree, positive lead", 60, sextic_positive},
        {3, "sixth degree, negative lead", 90, sextic_negative},
        {4, "fifth degree", 60, quintic},
        {5, "stable and escaping angles", 10, angles},
        {6, "property suite", 300, property_suite},
        {7, "optimizer certification", 180, optimizers},
        {8, "oracle equivalence", 600, oracle},
    };
    int failed = 0;
    for (const auto& c : all) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool ok = o.pass && secs <= c.budget;
        failed += !ok;
        std::cout << "criterion " << c.id << ": " << (ok ? "PASS" : "FAIL") << "  " << c.title << "  " << o.detail.str()
                  << "  [" << sci(secs) << " s of " << c.budget << " s]" << std::endl;
    }
    return failed ? 1 : 0;
}
