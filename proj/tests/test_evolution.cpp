#include <doctest.h>

#include <cmath>
#include <random>

#include "bellman/evolution.hpp"
#include "bellman/verify.hpp"
#include "fixtures.hpp"

using namespace bellman;

namespace {

std::vector<double> critical_values(const EvolutionTrace& tr) {
    std::vector<double> v;
    for (const auto& c : tr.criticals) v.push_back(c.eps);
    return v;
}

}  // namespace

TEST_CASE("exp evolves without events") {
    auto bf = fx::exp_fn();
    auto tr = evolve(bf, 0.9);
    CHECK(tr.criticals.empty());
    CHECK(tr.final_graph().eps == doctest::Approx(0.9));
}

TEST_CASE("quintic criticals") {
    auto bf = fx::quintic(1);
    auto tr = evolve(bf, 1.2);
    auto v = critical_values(tr);
    REQUIRE(v.size() == 2);
    CHECK(std::abs(v[0] - std::sqrt(1225.0 / 1614)) < 1e-6);
    CHECK(std::abs(v[1] - 1) < 1e-6);
}

TEST_CASE("quintic criticals scale with d") {
    auto bf = fx::quintic(4);
    auto v = critical_values(evolve(bf, 2.4));
    REQUIRE(v.size() == 2);
    CHECK(std::abs(v[0] - std::sqrt(1225.0 * 4 / 1614)) < 1e-6);
    CHECK(std::abs(v[1] - 2) < 1e-6);
}

TEST_CASE("sextic, positive lead") {
    auto bf = fx::sextic(1, 0);
    auto tr = evolve(bf, 1.0);
    auto v = critical_values(tr);
    REQUIRE(v.size() == 2);
    CHECK(std::abs(v[0] - std::sqrt(35.0) / 9) < 1e-6);
    CHECK(std::abs(v[1] - 1 / std::sqrt(2.0)) < 1e-6);
    // the angle meets both cup ends at once; only the second event changes the fixed part
    CHECK_FALSE(tr.criticals[0].essential);
    CHECK(tr.criticals[1].essential);
}

TEST_CASE("sextic, negative lead") {
    auto bf = fx::sextic(-1, 0);
    auto tr = evolve(bf, 3.0);
    std::vector<double> v = critical_values(tr);
    REQUIRE(v.size() >= 2);
    CHECK(std::abs(v.front() - std::sqrt(15.0 / 8)) < 1e-6);
    CHECK(std::abs(v.back() - std::sqrt(15.0 / 2)) < 1e-6);
    for (double e : v) {
        bool near = std::abs(e - std::sqrt(15.0 / 8)) < 1e-6 || std::abs(e - std::sqrt(15.0 / 2)) < 1e-6;
        CHECK(near);
    }
}

TEST_CASE("segments stay admissible and monotone") {
    for (int which = 0; which < 3; ++which) {
        auto bf = which == 0 ? fx::sextic(1, 0) : which == 1 ? fx::quintic(1) : fx::sextic(1, 0.5);
        auto tr = evolve(bf, which == 1 ? 1.2 : 0.9);
        for (const auto& seg : tr.segments) {
            for (int k = 1; k <= 8; ++k) {
                double eps = seg.eps_lo + (seg.eps_hi - seg.eps_lo) * k / 9;
                auto g = graph_at(tr, eps);
                auto rep = check_admissible(g);
                INFO("eps = " << eps << "\n" << rep.failures());
                CHECK(rep.pass());
                for (const auto& n : g.chain)
                    if (n.kind == NodeKind::long_chord) CHECK(n.stack.l_top == doctest::Approx(2 * eps).epsilon(1e-12));
            }
            // trolleybus bases never grow along a segment
            for (size_t s = 1; s < seg.samples.size(); ++s) {
                const auto& a = seg.samples[s - 1].chain;
                const auto& b = seg.samples[s].chain;
                REQUIRE(a.size() == b.size());
                for (size_t i = 0; i < a.size(); ++i)
                    if (a[i].kind == NodeKind::trolleybus_r || a[i].kind == NodeKind::trolleybus_l)
                        CHECK(b[i].stack.l_top <= a[i].stack.l_top + 1e-9);
            }
        }
    }
}

TEST_CASE("critical modifications keep the candidate") {
    for (int which = 0; which < 3; ++which) {
        auto bf = which == 0 ? fx::sextic(1, 0) : which == 1 ? fx::quintic(1) : fx::sextic(-1, 0);
        auto tr = evolve(bf, which == 2 ? 3.0 : 1.2);
        REQUIRE_FALSE(tr.criticals.empty());
        std::mt19937_64 rng(11);
        for (const auto& c : tr.criticals) {
            auto before = assemble(c.before), after = assemble(c.after);
            double worst = 0;
            for (int i = 0; i < 50; ++i) {
                Point x = random_strip_point(rng, -4, 4, c.eps);
                double bb = before.eval(x).B, ba = after.eval(x).B;
                worst = std::max(worst, std::abs(bb - ba) / (1 + std::abs(bb)));
            }
            INFO("critical at " << c.eps);
            CHECK(worst < 1e-7);
        }
    }
}

TEST_CASE("essential criticals stay below the sanity cap") {
    auto bf = fx::sextic(-1, 0.5);
    auto tr = evolve(bf, 1.5);
    size_t n = bf.roots().c.size() + bf.roots().v.size();
    CHECK(tr.essential().size() < 10 * (n + 2) * (n + 2));
}

TEST_CASE("eps beyond the summability radius is refused") {
    auto bf = fx::exp_fn(0.8);
    CHECK_THROWS_AS(evolve(bf, 0.9), Error);
}

TEST_CASE("trace serialization") {
    auto bf = fx::sextic(1, 0);
    auto tr = evolve(bf, 0.8);
    auto j = trace_to_json(tr);
    CHECK(j.at("critical_points").size() == 2);
    CHECK(j.at("segments").size() == 3);
    std::ostringstream os;
    write_criticals_csv(os, tr);
    std::string s = os.str();
    CHECK(s.rfind("eps,essential,events,vertices,changes\n", 0) == 0);
    CHECK(s.find("0.65734219812") != std::string::npos);
    CHECK(s.find("0.70710678118") != std::string::npos);
    // deterministic
    std::ostringstream again;
    write_criticals_csv(again, evolve(bf, 0.8));
    CHECK(again.str() == s);
}

TEST_CASE("escaping angle runs off to infinity at eps = 2") {
    auto bf = fx::escaping_angle();
    for (double eps : {0.5, 1.5, 1.9}) {
        auto g = evolve(bf, eps).final_graph();
        REQUIRE(g.chain.size() == 3);
        REQUIRE(g.chain[1].kind == NodeKind::angle);
        double want = eps / (eps - 1) * std::log(2 / ((2 - eps) * (1 + eps)));
        CHECK(std::abs(g.chain[1].w - want) < 1e-6);
    }
    auto tr = evolve(bf, 2.1);
    REQUIRE(tr.criticals.size() == 1);
    CHECK(std::abs(tr.criticals[0].eps - 2) < 1e-6);
    CHECK_FALSE(tr.criticals[0].essential);
    for (const auto& n : tr.final_graph().chain) CHECK(n.kind != NodeKind::angle);
    CHECK(check_admissible(tr.final_graph()).pass());
}

TEST_CASE("|t|^3 keeps its angle at zero") {
    auto bf = fx::abs_cubed();
    for (double eps : {0.2, 0.5, 1.0}) {
        auto g = evolve(bf, eps).final_graph();
        REQUIRE(g.chain.size() == 3);
        CHECK(std::abs(g.chain[1].w) < 1e-8);
    }
}
