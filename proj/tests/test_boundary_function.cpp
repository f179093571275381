#include <doctest.h>

#include <cmath>
#include <random>

#include "bellman/boundary_function.hpp"
#include "fixtures.hpp"

using namespace bellman;

TEST_CASE("exp derivatives at zero") {
    auto bf = fx::exp_fn();
    auto d = bf.eval(0);
    CHECK(d.f == 1);
    CHECK(d.f1 == 1);
    CHECK(d.f2 == 1);
    CHECK(d.f3 == 1);
}

TEST_CASE("sextic third derivative") { CHECK(fx::sextic().d(3, 2.0) == doctest::Approx(2.0).epsilon(1e-15)); }

TEST_CASE("solid root cubic vanishes inside") {
    auto d = fx::solid_root_cubic().eval(0.5);
    CHECK(d.f == 0);
    CHECK(d.f1 == 0);
    CHECK(d.f2 == 0);
    CHECK(d.f3 == 0);
}

TEST_CASE("sextic roots") {
    auto rs = fx::sextic().roots();
    REQUIRE(rs.c.size() == 3);
    REQUIRE(rs.v.size() == 2);
    CHECK(rs.c[0].hi == -inf);
    CHECK(rs.v[0].lo == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-13));
    CHECK(std::abs(rs.c[1].lo) < 1e-13);
    CHECK(rs.v[1].lo == doctest::Approx(std::sqrt(3.0)).epsilon(1e-13));
    CHECK(rs.c[2].lo == inf);
}

TEST_CASE("sine monster has five essential roots") {
    const double a = 1.5 * std::numbers::pi, pi = std::numbers::pi;
    auto rs = fx::sine_monster().roots();
    REQUIRE(rs.c.size() == 3);
    REQUIRE(rs.v.size() == 2);
    CHECK(rs.c[0].lo == -inf);
    CHECK(rs.c[0].hi == doctest::Approx(-a));
    CHECK(rs.v[0].mid() == doctest::Approx(-pi).epsilon(1e-12));
    CHECK(std::abs(rs.c[1].mid()) < 1e-12);
    CHECK(rs.v[1].mid() == doctest::Approx(pi).epsilon(1e-12));
    CHECK(rs.c[2].lo == doctest::Approx(a));
    CHECK(rs.c[2].hi == inf);
}

TEST_CASE("positive constant third derivative has only the root at plus infinity") {
    Piece p;
    p.poly = {0, 0, 0, 1.0 / 6};
    BoundaryFunction bf({p}, inf);
    REQUIRE(bf.roots().c.size() == 1);
    CHECK(bf.roots().v.empty());
    CHECK(bf.roots().c[0].lo == inf);
}

TEST_CASE("solid root and rays") {
    auto rs = fx::solid_root_cubic().roots();
    REQUIRE(rs.c.size() == 1);
    CHECK(rs.c[0].lo == -1);
    CHECK(rs.c[0].hi == 1);
    auto ab = fx::abs_cubed().roots();
    REQUIRE(ab.v.size() == 1);
    CHECK(ab.v[0].is_point());
    CHECK(ab.c.front().hi == -inf);
    CHECK(ab.c.back().lo == inf);
}

TEST_CASE("roots alternate with the declared sign in between") {
    for (auto bf : {fx::sextic(1, 0.5), fx::sextic(-1, 0), fx::quintic(), fx::sine_monster(), fx::escaping_angle()}) {
        std::vector<std::pair<Root, int>> all;
        for (auto& r : bf.roots().c) all.push_back({r, 1});
        for (auto& r : bf.roots().v) all.push_back({r, -1});
        std::sort(all.begin(), all.end(), [](auto& x, auto& y) { return x.first.mid() < y.first.mid(); });
        for (size_t i = 0; i + 1 < all.size(); ++i) {
            CHECK(all[i].second != all[i + 1].second);
            double lo = all[i].first.hi, hi = all[i + 1].first.lo;
            if (std::isinf(lo)) lo = hi - 20;
            if (std::isinf(hi)) hi = lo + 20;
            // after a c-root f''' is negative, after a v-root positive
            int sign = all[i].second > 0 ? -1 : 1;
            for (int k = 1; k < 1000; ++k) {
                double t = lo + (hi - lo) * k / 1000.0;
                CHECK(sign * bf.d(3, t) >= 0);
            }
        }
    }
}

TEST_CASE("root override must alternate") {
    RootStructure bad;
    bad.v.push_back({0, 0});
    CHECK_THROWS_AS(BoundaryFunction({fx::sextic().pieces()}, inf, bad), Error);
    RootStructure good;
    good.c.push_back({0, 0});
    CHECK_NOTHROW(BoundaryFunction({fx::quartic().pieces()}, inf, good));
}

TEST_CASE("conditions for exp") {
    auto ok = check_conditions(fx::exp_fn(), 0.99);
    CHECK(ok.pass());
    CHECK(std::isfinite(ok.weighted_variation));
    auto bad = check_conditions(fx::exp_fn(), 1.5);
    CHECK_FALSE(bad.pass());
    CHECK(check_conditions(fx::sextic(), 7.0).pass());
    CHECK(check_conditions(fx::sine_monster(), 3.0).pass());
}

TEST_CASE("junction continuity of shipped pieces") {
    for (auto bf : {fx::solid_root_cubic(), fx::sine_monster(), fx::abs_cubed(), fx::escaping_angle()}) {
        for (size_t i = 1; i < bf.pieces().size(); ++i) {
            double t = bf.pieces()[i].lo;
            for (int k = 0; k <= 2; ++k)
                CHECK(std::abs(bf.pieces()[i - 1].deriv(k, t) - bf.pieces()[i].deriv(k, t)) <=
                      1e-12 * (1 + std::abs(bf.d(0, t))));
        }
    }
}

TEST_CASE("weighted integral of exp against the decaying weight") {
    auto bf = fx::exp_fn();
    for (double eps : {0.3, 0.5, 0.9})
        for (double u : {-2.0, 0.0, 1.5}) {
            double got = weighted_stieltjes(bf, u, inf, eps, -1);
            double want = eps * std::exp(u * (1 - 1 / eps)) / (1 - eps);
            CHECK(got == doctest::Approx(want).epsilon(1e-13));
        }
    CHECK_THROWS_AS(weighted_stieltjes(bf, 0, inf, 1.2, -1), Error);
}

TEST_CASE("weighted integral is zero for quadratic f") {
    CHECK(weighted_stieltjes(fx::quadratic(), -3, 4, 0.5, 1) == 0.0);
}

TEST_CASE("left infinity integral for the sextic") {
    auto bf = fx::sextic(1, 0.5);
    const double c = 0.5;
    for (double eps : {0.2, 0.7})
        for (double u : {-1.0, 0.3, 2.0}) {
            double got = bf.weighted(3, -1 / eps, u, inf, u);
            double want = eps * ((u * u * u - 3 * u + c) + 3 * eps * (u * u - 1) + 6 * eps * eps * u + 6 * eps * eps * eps);
            CHECK(got == doctest::Approx(want).epsilon(1e-12));
        }
}

TEST_CASE("weighted integral is additive") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-6, 6);
    for (auto bf : {fx::sine_monster(), fx::escaping_angle(), fx::sextic()}) {
        for (int i = 0; i < 50; ++i) {
            double p = U(rng), q = U(rng), r = U(rng);
            std::array<double, 3> s{p, q, r};
            std::sort(s.begin(), s.end());
            double eps = 0.4;
            double whole = weighted_stieltjes(bf, s[0], s[2], eps, 1);
            double parts = weighted_stieltjes(bf, s[0], s[1], eps, 1) + weighted_stieltjes(bf, s[1], s[2], eps, 1);
            CHECK(std::abs(whole - parts) <= 1e-11 * (1 + std::abs(whole)));
        }
    }
}

TEST_CASE("weighted integral matches quadrature on trig pieces") {
    auto bf = fx::sine_monster();
    double eps = 0.6, p = -2, q = 3.5;
    double ref = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double t = p + (q - p) * (i + 0.5) / n;
        ref += std::exp(t / eps) * bf.d(3, t) * (q - p) / n;
    }
    CHECK(weighted_stieltjes(bf, p, q, eps, 1) == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("affine normalization") {
    auto bf = fx::sextic();
    CHECK_THROWS_AS(affine_normalize(bf, 0, 0, 0, 0, 1, 0), Error);
    CHECK_THROWS_AS(affine_normalize(bf, 1, 0, 0, 0, 0, 0), Error);
    auto [g, rec] = affine_normalize(bf, -2, 0.5, 1, -3, -1.5, 0.25);
    for (double t : {-2.0, -0.1, 0.7, 3.0}) {
        double s = -1.5 * t + 0.25;
        CHECK(g.d(0, t) == doctest::Approx(-2 * bf.d(0, s) + 0.5 * t * t + t - 3).epsilon(1e-12));
    }
    CHECK(rec.source_eps(0.4) == doctest::Approx(0.6));
    auto [x1, x2] = rec.source_point(0.5, 0.3);
    CHECK(x1 == doctest::Approx(-0.5));
    CHECK(x2 - x1 * x1 == doctest::Approx(2.25 * (0.3 - 0.25)));
    auto [id, r0] = affine_normalize(bf, 1, 0, 0, 0, 1, 0);
    for (double t : {-1.3, 0.0, 2.2}) CHECK(id.d(0, t) == bf.d(0, t));
    CHECK(r0.value(1.25, 0.1, 0.2) == 1.25);
}

TEST_CASE("minimize variant negates") {
    auto m = minimize_variant(fx::exp_fn());
    CHECK(m.d(0, 0.3) == -std::exp(0.3));
    auto rs = minimize_variant(fx::sextic()).roots();
    CHECK(rs.c.size() == 2);
    CHECK(rs.v.size() == 1);
}
