#include <doctest.h>

#include <cmath>

#include "bellman/forces.hpp"
#include "fixtures.hpp"

using namespace bellman;

TEST_CASE("chord force starts at the right differential") {
    auto bf = fx::sextic();
    Chord ch = make_chord(bf, -0.8, 0.8);
    Force F = right_chord_force(bf, ch, 0.5);
    CHECK(F.eval(0.8) == doctest::Approx(ch.dr).epsilon(1e-14));
    Force G = left_chord_force(bf, ch, 0.5);
    CHECK(G.eval(-0.8) == doctest::Approx(-ch.dl).epsilon(1e-14));
    CHECK_THROWS_AS(F.eval(0.0), Error);
    CHECK_THROWS_AS(G.eval(0.0), Error);
}

TEST_CASE("pure exponential force when f''' vanishes") {
    auto bf = fx::solid_root_cubic();
    Force F = anchored_force(bf, Side::right, -0.5, -2.0, 0.3);
    for (double u : {-0.4, 0.0, 0.7}) {
        CHECK(F.eval(u) == doctest::Approx(-2.0 * std::exp((-0.5 - u) / 0.3)).epsilon(1e-14));
        CHECK(force_derivative_check(F, u) < 1e-8);
    }
}

TEST_CASE("sextic left infinity force") {
    for (double c : {0.0, 0.5}) {
        auto bf = fx::sextic(1, c);
        for (double eps : {0.3, 0.9}) {
            Force F = left_infinity_force(bf, eps);
            for (double u : {-2.0, 0.1, 1.7}) {
                double want = (u * u * u - 3 * u + c) + 3 * eps * (u * u - 1) + 6 * eps * eps * u + 6 * eps * eps * eps;
                CHECK(F.eval(u) == doctest::Approx(eps * want).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("force ODE residuals") {
    auto bf = fx::sextic();
    Chord ch = make_chord(bf, -0.9, 0.9);
    Force F = right_chord_force(bf, ch, 0.5);
    CHECK(force_derivative_check(F, ch.b + 0.1) <= 1e-6);
    Force G = left_chord_force(bf, ch, 0.5);
    CHECK(force_derivative_check(G, ch.a - 0.3) <= 1e-6);
    auto tab = grow_chordal_domain(bf, GrowSeed::at_point(0), 1.6);
    Force D = chordal_domain_force(bf, Side::right, tab, 0, 1.6, 0.5);
    CHECK(force_derivative_check(D, 0.4) <= 1e-5);
    CHECK(force_derivative_check(D, 1.2) <= 1e-6);
    Force E = chordal_domain_force(bf, Side::left, tab, 0, 1.6, 0.5);
    CHECK(force_derivative_check(E, -0.4) <= 1e-5);
}

TEST_CASE("chordal domain force is continuous at the top chord") {
    auto bf = fx::sextic(1, 0.5);
    double c = bf.roots().c[1].mid();
    auto tab = grow_chordal_domain(bf, GrowSeed::at_point(c), 1.2);
    Force D = chordal_domain_force(bf, Side::right, tab, 0, 1.0, 0.5);
    Chord top = tab->chord_at(1.0);
    double h = 1e-9;
    CHECK(std::abs(D.eval(top.b + h) - D.eval(top.b - h)) <= 1e-7);
    CHECK(D.eval(top.b) == doctest::Approx(top.dr).epsilon(1e-12));
}

TEST_CASE("infinity tails") {
    auto e = fx::exp_fn();
    CHECK(tail_endpoint(left_infinity_force(e, 0.5)).endpoint == -inf);
    auto bf = fx::sextic();
    for (double eps : {0.75, 0.9}) {
        double tR = tail_endpoint(right_infinity_force(bf, eps)).endpoint;
        double tL = tail_endpoint(left_infinity_force(bf, eps)).endpoint;
        CHECK(tR > 0);
        CHECK(tL < 0);
    }
}

TEST_CASE("small cup right tail reaches past the next v root") {
    auto bf = fx::sextic();
    auto tab = grow_chordal_domain(bf, GrowSeed::at_point(0), 0.02);
    Force F = chordal_domain_force(bf, Side::right, tab, 0, 0.02, 0.01);
    double t = tail_endpoint(F).endpoint;
    CHECK(t > std::sqrt(3.0));
    CHECK(t < std::sqrt(3.0) + 0.1);
}

TEST_CASE("balance roots") {
    auto bf = fx::abs_cubed();
    for (double eps : {0.2, 0.5, 1.0}) {
        auto w = balance_root(right_infinity_force(bf, eps), left_infinity_force(bf, eps), -inf, inf);
        REQUIRE(w);
        CHECK(std::abs(*w) < 1e-8);
    }
    CHECK_THROWS_AS(balance_root(right_infinity_force(bf, 1), left_infinity_force(bf, 1), 1, 0), Error);
}

TEST_CASE("escaping angle") {
    auto bf = fx::escaping_angle();
    for (double eps : {0.5, 1.5, 1.9}) {
        auto w = balance_root(right_infinity_force(bf, eps), left_infinity_force(bf, eps), -inf, inf);
        REQUIRE(w);
        double want = eps / (eps - 1) * std::log(2 / ((2 - eps) * (1 + eps)));
        CHECK(*w == doctest::Approx(want).epsilon(1e-6));
    }
    CHECK_FALSE(balance_root(right_infinity_force(bf, 2.1), left_infinity_force(bf, 2.1), -inf, inf));
}
