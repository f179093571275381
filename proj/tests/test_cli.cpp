#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bellman/cli.hpp"

using namespace bellman;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path configs = fs::path(BELLMAN_SOURCE_DIR) / "configs";

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "bellman");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = run_cli(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / "bellman_cli_test" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json load(const std::string& name) { return json::parse(slurp(configs / (name + ".json"))); }

fs::path write_config(const fs::path& dir, const json& j) {
    fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<double> r;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                r.push_back(std::stod(cell));
            } catch (const std::invalid_argument&) {
                break;  // text columns end the numeric prefix
            }
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace

TEST_CASE("analyze") {
    auto dir = scratch("analyze");
    SUBCASE("exp below its radius passes") {
        json c = load("exp");
        c["boundary"]["eps_inf"] = 0.9;
        auto r = run({"analyze", "--config", write_config(dir, c).string(), "--out", dir.string()});
        CHECK(r.code == exit_ok);
        CHECK(json::parse(slurp(dir / "analysis.json")).at("pass") == true);
    }
    SUBCASE("exp with radius 1.5 fails the summability condition") {
        json c = load("exp");
        c["boundary"]["eps_inf"] = 1.5;
        c.erase("eps");
        auto r = run({"analyze", "--config", write_config(dir, c).string(), "--out", dir.string()});
        CHECK(r.code == exit_condition);
        CHECK(r.out.find("FAIL summability") != std::string::npos);
    }
    SUBCASE("polynomial lists its roots") {
        auto r = run({"analyze", "--config", (configs / "sextic_pos.json").string(), "--out", dir.string()});
        CHECK(r.code == exit_ok);
        CHECK(r.out.find("5 essential roots") != std::string::npos);
        CHECK(r.out.find("1.7320508075688772") != std::string::npos);
    }
    SUBCASE("eps at or above the radius is a condition failure") {
        auto r = run({"analyze", "--config", (configs / "exp.json").string(), "--eps", "0.99", "--out", dir.string()});
        CHECK(r.code == exit_condition);
    }
}

TEST_CASE("input errors") {
    auto dir = scratch("input");
    SUBCASE("malformed JSON") {
        fs::path p = dir / "bad.json";
        std::ofstream(p) << "{\"name\": ";
        auto r = run({"analyze", "--config", p.string()});
        CHECK(r.code == exit_input);
        CHECK(r.err.find("parse error") != std::string::npos);
    }
    SUBCASE("unknown key") {
        json c = load("exp");
        c["epsilon"] = 0.5;
        auto r = run({"analyze", "--config", write_config(dir, c).string()});
        CHECK(r.code == exit_input);
        CHECK(r.err.find("epsilon") != std::string::npos);
    }
    SUBCASE("missing config") {
        CHECK(run({"evolve", "--config", (dir / "none.json").string()}).code == exit_input);
    }
    SUBCASE("usage") {
        CHECK(run({}).code == exit_usage);
        CHECK(run({"evolve"}).code == exit_usage);
        CHECK(run({"--help"}).code == exit_ok);
    }
    CHECK(exit_code_for(Fault::iteration_cap) == exit_iteration_cap);
    CHECK(exit_code_for(Fault::glue_failure) == exit_verification);
    CHECK(exit_code_for(Fault::non_alternating_signs) == exit_condition);
}

TEST_CASE("evolve writes the critical points") {
    auto dir = scratch("evolve");
    SUBCASE("sextic") {
        auto r = run({"evolve", "--config", (configs / "sextic_pos.json").string(), "--eps", "1.0", "--out", dir.string()});
        REQUIRE(r.code == exit_ok);
        auto rows = read_csv(dir / "criticals.csv");
        REQUIRE(rows.size() == 2);
        CHECK(std::abs(rows[0][0] - std::sqrt(35.0) / 9) < 1e-6);
        CHECK(std::abs(rows[1][0] - 1 / std::sqrt(2.0)) < 1e-6);
        CHECK(fs::exists(dir / "trace.json"));
        CHECK(fs::exists(dir / "graph.json"));
    }
    SUBCASE("quintic") {
        auto r = run({"evolve", "--config", (configs / "quintic.json").string(), "--out", dir.string()});
        REQUIRE(r.code == exit_ok);
        CHECK(read_csv(dir / "criticals.csv").size() == 2);
    }
    SUBCASE("exp") {
        auto r = run({"evolve", "--config", (configs / "exp.json").string(), "--eps", "0.9", "--out", dir.string()});
        REQUIRE(r.code == exit_ok);
        CHECK(read_csv(dir / "criticals.csv").empty());
    }
    SUBCASE("sweep") {
        json c = load("sextic_pos");
        c.erase("eps");
        c["eps_sweep"] = {{"from", 0.3}, {"to", 0.9}, {"samples", 7}};
        auto r = run({"evolve", "--config", write_config(dir, c).string(), "--out", dir.string()});
        REQUIRE(r.code == exit_ok);
        CHECK(slurp(dir / "sweep.csv").find("birdie") != std::string::npos);
    }
}

TEST_CASE("outputs are deterministic") {
    auto a = scratch("det_a"), b = scratch("det_b");
    for (const auto& d : {a, b}) {
        REQUIRE(run({"evolve", "--config", (configs / "sextic_neg.json").string(), "--eps", "2.8", "--out", d.string()})
                    .code == exit_ok);
        REQUIRE(run({"optimize", "--config", (configs / "quintic.json").string(), "--out", d.string()}).code == exit_ok);
    }
    for (const char* f : {"trace.json", "criticals.csv", "graph.json", "optimizers.json"})
        CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / "criticals.csv").find("1.3693063") != std::string::npos);
}

TEST_CASE("eval") {
    auto dir = scratch("eval");
    SUBCASE("boundary points give f") {
        json c = load("sextic_pos");
        c["points"] = {{-1.5, 2.25}, {0.0, 0.0}, {0.7, 0.49}};
        REQUIRE(run({"eval", "--config", write_config(dir, c).string(), "--out", dir.string()}).code == exit_ok);
        for (const auto& r : read_csv(dir / "eval.csv")) {
            double t = r[0];
            double f = -std::pow(t, 4) / 8 + std::pow(t, 6) / 120;
            CHECK(r[2] == doctest::Approx(f).epsilon(1e-12));
        }
    }
    SUBCASE("quadratic f gives the linear function of x") {
        json c = load("quadratic");
        c["points"] = {{0.2, 0.1}, {-1, 1.2}, {1.5, 2.4}};
        for (bool minimize : {false, true}) {
            std::vector<std::string> args = {"eval", "--config", write_config(dir, c).string(), "--out", dir.string()};
            if (minimize) args.push_back("--minimize");
            REQUIRE(run(args).code == exit_ok);
            for (const auto& r : read_csv(dir / "eval.csv")) {
                CHECK(r[2] == doctest::Approx(0.3 - 0.7 * r[0] + r[1]).epsilon(1e-12));
                CHECK(r[3] == doctest::Approx(-0.7).epsilon(1e-10));
                CHECK(r[4] == doctest::Approx(1.0).epsilon(1e-10));
            }
        }
    }
    SUBCASE("exp matches the closed form") {
        json c = load("exp");
        const double eps = 0.5;
        c["points"] = {{-1, 1.1}, {0.3, 0.2}, {1.2, 1.5}};
        REQUIRE(run({"eval", "--config", write_config(dir, c).string(), "--out", dir.string()}).code == exit_ok);
        for (const auto& r : read_csv(dir / "eval.csv")) {
            double x1 = r[0], x2 = r[1];
            double u = x1 - eps + std::sqrt(eps * eps - (x2 - x1 * x1));
            double B = std::exp(u) * (1 + (x1 - u) / (1 - eps));
            CHECK(std::abs(r[2] - B) <= 1e-10 * std::abs(B));
        }
    }
    SUBCASE("points outside the strip are input errors") {
        json c = load("exp");
        c["points"] = {{0, 1}};
        auto r = run({"eval", "--config", write_config(dir, c).string(), "--out", dir.string()});
        CHECK(r.code == exit_input);
    }
}

TEST_CASE("optimize") {
    auto dir = scratch("optimize");
    json c = load("sextic_pos");
    c["points"] = {{0, 0.2}, {1.2, 1.7}, {-2, 4.1}};
    auto r = run({"optimize", "--config", write_config(dir, c).string(), "--out", dir.string(), "--jobs", "2"});
    CHECK(r.code == exit_ok);
    auto j = json::parse(slurp(dir / "optimizers.json"));
    REQUIRE(j.at("points").size() == 3);
    for (const auto& p : j.at("points")) CHECK(p.at("report").at("pass") == true);
    for (int k = 0; k < 3; ++k) {
        CHECK(fs::exists(dir / ("optimizer_" + std::to_string(k) + ".csv")));
        CHECK(fs::exists(dir / ("delivery_" + std::to_string(k) + ".csv")));
    }
}

TEST_CASE("verify") {
    auto dir = scratch("verify");
    SUBCASE("shipped config passes") {
        auto r = run({"verify", "--config", (configs / "sine_monster.json").string(), "--out", dir.string()});
        CHECK(r.code == exit_ok);
        CHECK(json::parse(slurp(dir / "verify.json")).at("pass") == true);
    }
    SUBCASE("corrupted graph file") {
        REQUIRE(run({"evolve", "--config", (configs / "sextic_pos.json").string(), "--out", dir.string()}).code ==
                exit_ok);
        json g = json::parse(slurp(dir / "graph.json"));
        for (auto& v : g["vertices"])
            if (v["kind"] == "birdie") v["params"]["stack"]["l"] = v["params"]["stack"]["l"].get<double>() * 0.8;
        std::ofstream(dir / "bad_graph.json") << g.dump();
        json c = load("sextic_pos");
        c["graph"] = (dir / "bad_graph.json").string();
        auto r = run({"verify", "--config", write_config(dir, c).string(), "--out", dir.string()});
        CHECK(r.code == exit_verification);
        CHECK(r.err.find("GlueFailure") != std::string::npos);
    }
    SUBCASE("inadmissible graph file") {
        REQUIRE(run({"evolve", "--config", (configs / "sextic_pos.json").string(), "--eps", "0.3", "--out", dir.string()})
                    .code == exit_ok);
        json g = json::parse(slurp(dir / "graph.json"));
        // a long chord cut short, with the edges left out, reads fine but is no longer full
        for (auto& v : g["vertices"])
            if (v["kind"] == "long_chord") v["params"]["stack"]["l"] = 0.5;
        g.erase("edges");
        std::ofstream(dir / "short_chord.json") << g.dump();
        json c = load("sextic_pos");
        c["graph"] = (dir / "short_chord.json").string();
        auto r = run({"verify", "--config", write_config(dir, c).string(), "--eps", "0.3", "--out", dir.string()});
        CHECK(r.code == exit_verification);
        CHECK(r.out.find("FAIL admissible graph") != std::string::npos);
    }
    SUBCASE("oracle comparison on the quadratic") {
        auto r = run({"verify", "--config", (configs / "quadratic.json").string(), "--out", dir.string()});
        CHECK(r.code == exit_ok);
        CHECK(r.out.find("oracle max abs") != std::string::npos);
        CHECK(fs::exists(dir / "oracle_grid.csv"));
    }
}

TEST_CASE("export") {
    auto dir = scratch("export") / "nested" / "missing";
    auto r = run({"export", "--config", (configs / "sextic_pos.json").string(), "--out", dir.string()});
    REQUIRE(r.code == exit_ok);
    for (const char* f : {"foliation.svg", "graph.json", "boundaries.csv", "criticals.csv"}) CHECK(fs::exists(dir / f));
    std::string svg = slurp(dir / "foliation.svg");
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("polygon") != std::string::npos);

    auto e = scratch("export_exp");
    REQUIRE(run({"export", "--config", (configs / "exp.json").string(), "--out", e.string()}).code == exit_ok);
    CHECK(slurp(e / "foliation.svg").find("polyline") != std::string::npos);
}
