#include <doctest.h>

#include <cmath>

#include "bellman/evolution.hpp"
#include "bellman/oracle.hpp"
#include "fixtures.hpp"

using namespace bellman;

namespace {

OracleOptions pinned_to(const BellmanCandidate& bc) {
    OracleOptions o;
    o.edge = [&bc](const Point& x) { return bc.eval(x).B; };
    return o;
}

BoundaryFunction linear() {
    Piece p;
    p.poly = {0.2, 1.0};
    return BoundaryFunction({p}, inf);
}

}  // namespace

TEST_CASE("grid nodes lie in the strip") {
    GridDomain g{-1.5, 2, 0.4, 30, 7};
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) {
            Point x = g.node(i, j);
            double h = x.x2 - x.x1 * x.x1;
            CHECK(h >= -1e-15);
            CHECK(h <= 0.16 + 1e-15);
        }
    CHECK(g.x1(g.n1 - 1) == doctest::Approx(2));
}

TEST_CASE("quadratic and linear f are reproduced exactly") {
    auto q = fx::quadratic();
    const double eps = 0.5;
    GridDomain g{-2, 2, eps, 60, 12};
    auto V = grid_minimal_concave(q, eps, g);
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) {
            Point x = g.node(i, j);
            CHECK(std::abs(V.at(i, j) - (0.3 - 0.7 * x.x1 + x.x2)) <= 1e-10);
        }
    auto bc = assemble(simple_picture(q, eps));
    CHECK(compare(bc, V).max_abs <= 1e-10);

    auto l = linear();
    auto W = grid_minimal_concave(l, eps, g);
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) CHECK(std::abs(W.at(i, j) - (0.2 + g.x1(i))) <= 1e-10);
}

TEST_CASE("exp: iterates grow monotonically and refinement converges") {
    auto bf = fx::exp_fn();
    const double eps = 0.5;
    auto bc = assemble(simple_picture(bf, eps));
    auto coarse = grid_minimal_concave(bf, eps, {-4, 2, eps, 50, 10}, pinned_to(bc));
    auto fine = grid_minimal_concave(bf, eps, {-4, 2, eps, 100, 20}, pinned_to(bc));
    CHECK(coarse.monotone);
    CHECK(fine.monotone);
    auto c = compare(bc, coarse), f = compare(bc, fine);
    // the locally concave candidate majorizes the discrete scheme
    CHECK(f.max_excess <= 1e-9);
    CHECK(f.max_rel < 5e-3);
    CHECK(c.max_abs / f.max_abs >= 1.8);
}

TEST_CASE("sextic on a small grid stays below and near the candidate") {
    auto bf = fx::sextic();
    const double eps = 0.3;
    auto bc = assemble(simple_picture(bf, eps));
    auto V = grid_minimal_concave(bf, eps, {-2.5, 2.5, eps, 120, 20}, pinned_to(bc));
    auto c = compare(bc, V);
    CHECK(c.max_excess <= 1e-9);
    CHECK(c.max_rel < 1e-2);
}

TEST_CASE("comparison guards") {
    auto bf = fx::exp_fn();
    auto bc = assemble(simple_picture(bf, 0.5));
    auto V = grid_minimal_concave(bf, 0.4, {-3, 1, 0.4, 30, 6});
    CHECK_THROWS_AS(compare(bc, V), Error);
}

TEST_CASE("an injected disagreement is located") {
    auto q = fx::quadratic();
    const double eps = 0.5;
    auto bc = assemble(simple_picture(q, eps));
    GridDomain g{-2, 2, eps, 40, 8};
    auto V = grid_minimal_concave(q, eps, g);
    V.V[size_t(23) * g.n2 + 5] += 0.01;
    auto c = compare(bc, V);
    CHECK(c.max_abs == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(c.where.x1 == doctest::Approx(g.x1(23)));
    CHECK(c.where.x2 == doctest::Approx(g.x2(23, 5)));
    CHECK(c.max_excess == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("parallel sweeps give the same values") {
    auto bf = fx::sextic();
    const double eps = 0.3;
    auto bc = assemble(simple_picture(bf, eps));
    GridDomain g{-2, 2, eps, 60, 10};
    auto o = pinned_to(bc);
    auto a = grid_minimal_concave(bf, eps, g, o);
    o.jobs = 3;
    auto b = grid_minimal_concave(bf, eps, g, o);
    CHECK(a.V == b.V);
}

TEST_CASE("sweep cap is reported") {
    auto bf = fx::exp_fn();
    OracleOptions o;
    o.max_sweeps = 2;
    CHECK_THROWS_AS(grid_minimal_concave(bf, 0.5, {-4, 2, 0.5, 60, 12}, o), Error);
}
