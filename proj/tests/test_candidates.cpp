#include <doctest.h>

#include <cmath>

#include "bellman/candidates.hpp"
#include "fixtures.hpp"

using namespace bellman;

TEST_CASE("tangent points") {
    const double eps = 0.4;
    CHECK(tangent_point(lower_point(0.7), Side::right, eps) == doctest::Approx(0.7));
    CHECK(tangent_point(lower_point(0.7), Side::left, eps) == doctest::Approx(0.7));
    CHECK(tangent_point(upper_point(0.7, eps), Side::right, eps) == doctest::Approx(1.1));
    CHECK(tangent_point(upper_point(0.7, eps), Side::left, eps) == doctest::Approx(0.3));
    CHECK(tangent_point({0, eps * eps / 2}, Side::right, eps) == doctest::Approx(eps - eps / std::sqrt(2.0)));
}

TEST_CASE("exp slope from the left infinity") {
    auto bf = fx::exp_fn();
    for (double eps : {0.3, 0.5, 0.9}) {
        auto m = SlopeFunction::from_force(left_infinity_force(bf, eps));
        for (double u : {-3.0, 0.0, 1.2}) {
            auto v = m.eval(u);
            double want = std::exp(u) / (1 - eps);
            CHECK(v.m == doctest::Approx(want).epsilon(1e-13));
            CHECK(v.m1 == doctest::Approx(want).epsilon(1e-13));
            CHECK(v.m2 == doctest::Approx(want).epsilon(1e-13));
            // left slope equation: -eps m' + m - f' = 0
            CHECK(std::abs(-eps * v.m1 + v.m - bf.d(1, u)) <= 1e-12 * want);
        }
    }
}

TEST_CASE("anchor value is reproduced") {
    auto bf = fx::sextic();
    auto m = SlopeFunction::from_value(bf, Side::right, 0.4, 1.7, 0.3);
    CHECK(m.eval(0.4).m == doctest::Approx(1.7).epsilon(1e-15));
    auto l = SlopeFunction::from_value(bf, Side::left, 0.4, -0.2, 0.3);
    CHECK(l.eval(0.4).m == doctest::Approx(-0.2).epsilon(1e-14));
}

TEST_CASE("chord anchored slope carries the chord force") {
    auto bf = fx::sextic();
    const double eps = 0.3;
    auto tab = grow_chordal_domain(bf, GrowSeed::at_point(0), 2 * eps);
    Chord ch = tab->chord_at(2 * eps);
    auto m = SlopeFunction::from_value(bf, Side::right, ch.b, 0.5 * (bf.d(1, ch.a) + bf.d(1, ch.b)), eps);
    Force F = right_chord_force(bf, ch, eps);
    for (double u : {ch.b, ch.b + 0.2, ch.b + 1.0}) CHECK(eps * m.eval(u).m2 == doctest::Approx(F.eval(u)).epsilon(1e-9));
}

TEST_CASE("exp tangent figure against the closed form") {
    auto bf = fx::exp_fn();
    for (double eps : {0.3, 0.9}) {
        auto fig = tangent_figure(bf, SlopeFunction::from_force(left_infinity_force(bf, eps)), -inf, inf);
        for (double x1 : {-2.0, 0.0, 0.8})
            for (double s : {0.0, 0.3, 1.0}) {
                Point x{x1, x1 * x1 + s * eps * eps};
                double u = tangent_point(x, Side::left, eps);
                double want = std::exp(u) * (1 + (x1 - u) / (1 - eps));
                CHECK(fig.eval(x).B == doctest::Approx(want).epsilon(1e-12));
                CHECK(fig.contains(x));
            }
        CHECK(fig.eval(lower_point(0.3)).B == doctest::Approx(std::exp(0.3)).epsilon(1e-14));
    }
}

TEST_CASE("quadratic candidate is x2") {
    Piece p;
    p.poly = {0, 0, 1};
    BoundaryFunction bf({p}, inf);
    auto fig = tangent_figure(bf, SlopeFunction::from_force(left_infinity_force(bf, 0.5)), -inf, inf);
    for (double x1 : {-1.0, 0.4})
        for (double s : {0.0, 0.5, 1.0}) {
            Point x{x1, x1 * x1 + s * 0.25};
            auto e = fig.eval(x);
            CHECK(e.B == doctest::Approx(x.x2).epsilon(1e-14));
            CHECK(e.g2 == doctest::Approx(1.0));
            CHECK(std::abs(e.g1) < 1e-14);
        }
}

TEST_CASE("gradient is constant along a tangent") {
    auto bf = fx::sextic(1, 0.5);
    const double eps = 0.35;
    auto fig = tangent_figure(bf, SlopeFunction::from_force(right_infinity_force(bf, eps)), -inf, 1.0);
    double u = -0.6;
    Point p = lower_point(u), q = upper_point(u - eps, eps);
    for (double s : {0.25, 0.75}) {
        Point x{p.x1 + s * (q.x1 - p.x1), p.x2 + s * (q.x2 - p.x2)};
        CHECK(tangent_point(x, Side::right, eps) == doctest::Approx(u).epsilon(1e-12));
        auto e = fig.eval(x), e0 = fig.eval(p);
        CHECK(e.g1 == doctest::Approx(e0.g1).epsilon(1e-9));
        CHECK(e.g2 == doctest::Approx(e0.g2).epsilon(1e-9));
    }
}

TEST_CASE("chordal figure values") {
    auto bf = fx::sextic();
    const double eps = 0.3;
    auto tab = grow_chordal_domain(bf, GrowSeed::at_point(0), 2 * eps);
    auto fig = chordal_figure(bf, tab, 0, 2 * eps, eps);
    Chord ch = tab->chord_at(0.4);
    Point mid{0.5 * (ch.a + ch.b), 0.5 * (ch.a * ch.a + ch.b * ch.b)};
    CHECK(fig.contains(mid));
    CHECK(fig.eval(mid).B == doctest::Approx(0.5 * (bf.d(0, ch.a) + bf.d(0, ch.b))).epsilon(1e-10));
    CHECK(fig.eval(lower_point(0.2)).B == doctest::Approx(bf.d(0, 0.2)).epsilon(1e-12));
    CHECK(fig.contains(upper_point(0.0, eps)));
    CHECK_FALSE(fig.contains(upper_point(0.29, eps)));
}

TEST_CASE("chordal domain glues to its right tangents") {
    auto bf = fx::sextic();
    const double eps = 0.3;
    auto tab = grow_chordal_domain(bf, GrowSeed::at_point(0), 2 * eps);
    auto ch = chordal_figure(bf, tab, 0, 2 * eps, eps);
    Chord top = tab->chord_at(2 * eps);
    auto m = SlopeFunction::from_force(chordal_domain_force(bf, Side::right, tab, 0, 2 * eps, eps));
    auto tan = tangent_figure(bf, m, top.b, 2.0);
    auto itf = tangent_interface(top.b, Side::right, eps);
    auto r = glue_check(ch, tan, itf);
    CHECK(r.grad_x2 <= 1e-10);
    CHECK(r.value <= 1e-10);
    double m0 = m.eval(top.b).m;
    auto bad = tangent_figure(bf, SlopeFunction::from_value(bf, Side::right, top.b, m0 + 1e-3, eps), top.b, 2.0);
    CHECK(glue_check(ch, bad, itf).grad_x2 == doctest::Approx(1e-3 / (2 * eps)).epsilon(1e-6));
}

TEST_CASE("angle coefficients") {
    auto bf = fx::abs_cubed();
    const double eps = 0.5;
    double mR = SlopeFunction::from_force(right_infinity_force(bf, eps)).eval(0).m;
    double mL = SlopeFunction::from_force(left_infinity_force(bf, eps)).eval(0).m;
    CHECK(mL == doctest::Approx(-mR));
    Linear lin = angle_coefficients(bf, 0, mR, mL, eps);
    CHECK(lin.b2 == doctest::Approx((mL - mR) / (4 * eps)));
    CHECK(lin.eval(lower_point(0)).B == doctest::Approx(0.0));
    CHECK_THROWS_AS(angle_coefficients(bf, 0, mR + 1e-3, mL, eps), Error);
    Linear flat = angle_coefficients(fx::sextic(), 0.3, fx::sextic().d(1, 0.3), fx::sextic().d(1, 0.3), eps);
    CHECK(flat.b2 == 0);
    CHECK(flat.b1 == doctest::Approx(fx::sextic().d(1, 0.3)));
    CHECK(point_coefficients(bf, 0.7).b2 == doctest::Approx(0.5 * bf.d(2, 0.7)));
}

TEST_CASE("chord coefficients interpolate the chord ends") {
    auto bf = fx::sextic(1, 0.5);
    Linear lin = chord_coefficients(bf, -0.4, 0.9);
    CHECK(lin.eval(lower_point(-0.4)).B == doctest::Approx(bf.d(0, -0.4)).epsilon(1e-13));
    CHECK(lin.eval(lower_point(0.9)).B == doctest::Approx(bf.d(0, 0.9)).epsilon(1e-13));
}
