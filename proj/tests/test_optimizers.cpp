#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bellman/evolution.hpp"
#include "bellman/optimizers.hpp"
#include "bellman/verify.hpp"
#include "fixtures.hpp"

using namespace bellman;

namespace {

OptimizerPiece step(double lo, double hi, double v) {
    OptimizerPiece p;
    p.lo = lo;
    p.hi = hi;
    p.value = v;
    return p;
}

OptimizerPiece log_piece(double lo, double hi, double scale, double offset) {
    OptimizerPiece p;
    p.is_log = true;
    p.lo = lo;
    p.hi = hi;
    p.scale = scale;
    p.offset = offset;
    return p;
}

bool step_only(const Optimizer& phi) {
    return std::none_of(phi.pieces.begin(), phi.pieces.end(), [](const OptimizerPiece& p) { return p.is_log; });
}

}  // namespace

TEST_CASE("BMO norm of model functions") {
    SUBCASE("two-valued step") {
        for (double h : {0.1, 1.0, 3.0}) {
            Optimizer phi{{step(0, 0.5, h), step(0.5, 1, -h)}, {}};
            auto n = bmo_norm(phi);
            CHECK(n.sup_variance == doctest::Approx(h * h).epsilon(1e-12));
            CHECK(n.norm() == doctest::Approx(h).epsilon(1e-12));
        }
    }
    SUBCASE("eps log tau") {
        for (double eps : {0.3, 1.0}) {
            Optimizer phi{{log_piece(0, 1, eps, 0)}, {}};
            auto n = bmo_norm(phi);
            CHECK(n.sup_variance == doctest::Approx(eps * eps).epsilon(1e-9));
            CHECK(n.sup_variance <= eps * eps * (1 + 1e-8));
        }
    }
    SUBCASE("constant") { CHECK(bmo_norm(Optimizer::constant(2.5)).sup_variance == doctest::Approx(0).epsilon(1e-15)); }
    SUBCASE("refinement never loses to the grid") {
        Optimizer phi{{log_piece(0, 0.4, 0.5, 1), step(0.4, 0.7, 1.2), step(0.7, 1, -0.3)}, {}};
        auto n = bmo_norm(phi);
        CHECK(n.sup_variance >= n.grid_variance);
        CHECK(n.s < n.t);
    }
}

TEST_CASE("closed-form moments") {
    Optimizer phi{{log_piece(0, 1, 0.5, 2)}, {}};
    auto m = moments(phi, 0, 1);
    // int_0^1 log t = -1, int_0^1 log^2 t = 2
    CHECK(m.m0 == doctest::Approx(1));
    CHECK(m.m1 == doctest::Approx(2 - 0.5).epsilon(1e-13));
    CHECK(m.m2 == doctest::Approx(4 - 2 * 2 * 0.5 + 0.25 * 2).epsilon(1e-13));
}

TEST_CASE("boundary points get constants") {
    auto bf = fx::sextic();
    auto bc = assemble(simple_picture(bf, 0.3));
    for (double t : {-2.0, -0.1, 0.0, 1.3}) {
        Point x = lower_point(t);
        auto phi = optimizer_at(bc, x);
        for (double tau : {0.01, 0.5, 0.99}) CHECK(phi.eval(tau) == doctest::Approx(t).epsilon(1e-9));
        auto r = verify_optimizer(phi, x, bc);
        CHECK(r.pass);
        CHECK(r.mean_error < 1e-9);
        CHECK(r.bmo < 1e-6);
    }
}

TEST_CASE("chordal domains give two-step functions") {
    auto bf = fx::sextic();
    const double eps = 0.3;
    auto bc = assemble(simple_picture(bf, eps));
    std::mt19937_64 rng(5);
    int done = 0;
    while (done < 30) {
        Point x = random_strip_point(rng, -0.3, 0.3, eps);
        if (bc.figures[bc.locate(x)].kind != FigureKind::chordal) continue;
        ++done;
        auto phi = optimizer_at(bc, x);
        REQUIRE(step_only(phi));
        std::vector<double> values;
        for (const auto& p : phi.pieces)
            if (p.hi > p.lo) values.push_back(p.value);
        values.erase(std::unique(values.begin(), values.end()), values.end());
        CHECK(values.size() <= 2);
        CHECK(verify_optimizer(phi, x, bc).pass);
    }
}

TEST_CASE("exp on the upper parabola: eps log tau") {
    auto bf = fx::exp_fn();
    for (double eps : {0.3, 0.5, 0.9}) {
        auto bc = assemble(simple_picture(bf, eps));
        Point x = upper_point(0.4, eps);
        auto phi = optimizer_at(bc, x);
        // left tangents: the singularity sits at tau = 0 and carries the large values
        double c = phi.eval(0.5) + eps * std::log(0.5);
        for (double tau : {1e-6, 0.01, 0.3, 0.9})
            CHECK(phi.eval(tau) + eps * std::log(tau) == doctest::Approx(c).epsilon(1e-9));
        auto r = verify_optimizer(phi, x, bc);
        CHECK(r.pass);
        // its delivery curve runs along the upper parabola
        auto d = delivery_curve(phi, bc);
        CHECK(d.strip_violation < 1e-9);
        for (size_t i = 0; i < d.gamma.size(); i += 20)
            CHECK(d.gamma[i].x2 - d.gamma[i].x1 * d.gamma[i].x1 == doctest::Approx(eps * eps).epsilon(1e-7));
        CHECK(d.convex);
    }
}

TEST_CASE("-exp on the upper parabola: increasing eps log tau") {
    auto e = fx::exp_fn();
    auto bf = minimize_variant(e);
    const double eps = 0.5;
    auto bc = assemble(simple_picture(bf, eps));
    Point x = upper_point(-0.3, eps);
    auto phi = optimizer_at(bc, x);
    double c = phi.eval(0.5) - eps * std::log(0.5);
    for (double tau : {1e-6, 0.01, 0.3, 0.9}) CHECK(phi.eval(tau) - eps * std::log(tau) == doctest::Approx(c).epsilon(1e-9));
    CHECK(verify_optimizer(phi, x, bc).pass);
}

TEST_CASE("truncated log piece fails the f identity") {
    auto bf = fx::exp_fn();
    const double eps = 0.5;
    auto bc = assemble(simple_picture(bf, eps));
    Point x = upper_point(0.2, eps);
    auto phi = optimizer_at(bc, x);
    REQUIRE(verify_optimizer(phi, x, bc).pass);
    // cut the singularity: constant on [0, 0.2]
    Optimizer cut;
    double v = phi.eval(0.2);
    cut.pieces.push_back(step(0, 0.2, v));
    for (auto p : phi.pieces) {
        if (p.hi <= 0.2) continue;
        p.lo = std::max(p.lo, 0.2);
        cut.pieces.push_back(p);
    }
    auto r = verify_optimizer(cut, x, bc);
    CHECK_FALSE(r.pass);
    CHECK(r.f_error > 1e-7 * (1 + std::abs(r.B)));
}

TEST_CASE("constant delivery curve") {
    auto bf = fx::sextic();
    auto bc = assemble(simple_picture(bf, 0.3));
    auto d = delivery_curve(Optimizer::constant(0.7), bc);
    for (const auto& g : d.gamma) {
        CHECK(g.x1 == doctest::Approx(0.7));
        CHECK(g.x2 == doctest::Approx(0.49));
    }
    CHECK(d.bellman_mismatch < 1e-12);
}

TEST_CASE("monotone rearrangement of step optimizers") {
    auto bf = fx::sextic();
    const double eps = 0.3;
    auto bc = assemble(simple_picture(bf, eps));
    std::mt19937_64 rng(9);
    int done = 0;
    for (int tries = 0; done < 20 && tries < 2000; ++tries) {
        Point x = random_strip_point(rng, -3, 3, eps);
        auto phi = optimizer_at(bc, x);
        if (!step_only(phi) || phi.pieces.size() < 2) continue;
        ++done;
        // scramble: split every step in halves and put the second halves in reverse order
        std::vector<std::pair<double, double>> parts;  // (length, value)
        for (const auto& p : phi.pieces) parts.push_back({(p.hi - p.lo) / 2, p.value});
        std::vector<std::pair<double, double>> order = parts;
        order.insert(order.end(), parts.rbegin(), parts.rend());
        Optimizer mixed;
        double at = 0;
        for (const auto& [len, val] : order) {
            mixed.pieces.push_back(step(at, at + len, val));
            at += len;
        }
        mixed.pieces.back().hi = 1;
        auto a = moments(phi, 0, 1), b = moments(mixed, 0, 1);
        CHECK(a.m1 == doctest::Approx(b.m1).epsilon(1e-12));
        CHECK(a.m2 == doctest::Approx(b.m2).epsilon(1e-12));
        CHECK(f_integral(phi, bf) == doctest::Approx(f_integral(mixed, bf)).epsilon(1e-12));
        CHECK(bmo_norm(phi).sup_variance <= bmo_norm(mixed).sup_variance * (1 + 1e-12) + 1e-15);
    }
    CHECK(done == 20);
}

TEST_CASE("optimizers are certified at random points") {
    struct Case {
        BoundaryFunction bf;
        double eps, lo, hi;
    };
    std::vector<Case> cases = {{fx::exp_fn(), 0.5, -4, 2}, {fx::quintic(1), 1.2, -3, 3}, {fx::sextic(1, 0), 0.68, -3, 3}};
    for (const auto& c : cases) {
        auto tr = evolve(c.bf, c.eps);
        auto bc = assemble(tr.final_graph());
        std::mt19937_64 rng(1);
        auto st = optimizer_check(bc, c.lo, c.hi, 60, rng);
        INFO(st.first_problem);
        CHECK(st.failures == 0);
        CHECK(st.errors == 0);
    }
}

TEST_CASE("optimizer JSON round trip") {
    Optimizer phi{{log_piece(0, 0.4, 0.5, 1), step(0.4, 1, 1.2)}, {0, 2}};
    auto back = optimizer_from_json(optimizer_to_json(phi));
    for (double tau : {0.1, 0.39, 0.5, 0.99}) CHECK(back.eval(tau) == phi.eval(tau));
}
