#include "bellman/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace bellman {

using nlohmann::json;
namespace fs = std::filesystem;

double json_real(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return inf;
        if (s == "-inf") return -inf;
    }
    throw Error(Fault::input, "expected a number or \"inf\"/\"-inf\", got " + j.dump());
}

json real_json(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

namespace {

void known_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw Error(Fault::input, "unknown key '" + it.key() + "' in " + where);
}

std::vector<Root> roots_from(const json& a) {
    std::vector<Root> r;
    for (const auto& e : a) {
        if (e.is_array() && e.size() == 2)
            r.push_back({json_real(e[0]), json_real(e[1])});
        else {
            double t = json_real(e);
            r.push_back({t, t});
        }
    }
    return r;
}

json roots_to(const std::vector<Root>& rs) {
    json a = json::array();
    for (const auto& r : rs) a.push_back(json::array({real_json(r.lo), real_json(r.hi)}));
    return a;
}

double positive(const json& j, const char* key, double def) {
    if (!j.contains(key)) return def;
    double v = json_real(j.at(key));
    if (!(v > 0)) throw Error(Fault::input, std::string("'") + key + "' must be positive");
    return v;
}

int count(const json& j, const char* key, int def) {
    if (!j.contains(key)) return def;
    int v = j.at(key).get<int>();
    if (v < 0) throw Error(Fault::input, std::string("'") + key + "' must not be negative");
    return v;
}

}  // namespace

BoundaryFunction boundary_from_json(const json& j) {
    try {
        known_keys(j, {"pieces", "eps_inf", "roots_override"}, "boundary");
        std::vector<Piece> pieces;
        for (const auto& pj : j.at("pieces")) {
            known_keys(pj, {"lo", "hi", "poly", "exp", "trig"}, "piece");
            Piece p;
            p.lo = pj.contains("lo") ? json_real(pj.at("lo")) : -inf;
            p.hi = pj.contains("hi") ? json_real(pj.at("hi")) : inf;
            if (pj.contains("poly")) p.poly = pj.at("poly").get<std::vector<double>>();
            if (pj.contains("exp"))
                for (const auto& e : pj.at("exp")) p.exps.push_back({e.at("a").get<double>(), e.at("b").get<double>()});
            if (pj.contains("trig"))
                for (const auto& e : pj.at("trig"))
                    p.trigs.push_back({e.at("a").get<double>(), e.at("b").get<double>(), e.value("c", 0.0)});
            pieces.push_back(std::move(p));
        }
        double eps_inf = j.contains("eps_inf") ? json_real(j.at("eps_inf")) : inf;
        std::optional<RootStructure> ov;
        if (j.contains("roots_override")) {
            const json& r = j.at("roots_override");
            ov = RootStructure{roots_from(r.at("c")), roots_from(r.value("v", json::array()))};
        }
        return BoundaryFunction(std::move(pieces), eps_inf, ov);
    } catch (const json::exception& e) {
        throw Error(Fault::input, std::string("malformed boundary function: ") + e.what());
    }
}

json boundary_to_json(const BoundaryFunction& bf) {
    json pieces = json::array();
    for (const auto& p : bf.pieces()) {
        json pj = {{"lo", real_json(p.lo)}, {"hi", real_json(p.hi)}};
        if (!p.poly.empty()) pj["poly"] = p.poly;
        if (!p.exps.empty()) {
            pj["exp"] = json::array();
            for (const auto& e : p.exps) pj["exp"].push_back({{"a", e.a}, {"b", e.b}});
        }
        if (!p.trigs.empty()) {
            pj["trig"] = json::array();
            for (const auto& t : p.trigs) pj["trig"].push_back({{"a", t.a}, {"b", t.b}, {"c", t.c}});
        }
        pieces.push_back(pj);
    }
    return {{"pieces", pieces},
            {"eps_inf", real_json(bf.eps_inf())},
            {"roots", {{"c", roots_to(bf.roots().c)}, {"v", roots_to(bf.roots().v)}}}};
}

std::vector<double> EpsSweep::values() const {
    std::vector<double> v;
    if (samples <= 1) return {to};
    for (int i = 0; i < samples; ++i) v.push_back(from + (to - from) * i / (samples - 1));
    return v;
}

double RunConfig::run_eps() const {
    if (eps) return *eps;
    if (sweep) return sweep->to;
    throw Error(Fault::input, "no eps given: set \"eps\", \"eps_sweep\" or --eps");
}

std::vector<Point> read_points_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Fault::input, "cannot open points file " + path.string());
    std::vector<Point> pts;
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string a, b;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ','))
            throw Error(Fault::input, path.string() + ":" + std::to_string(ln) + ": expected x1,x2");
        try {
            pts.push_back({std::stod(a), std::stod(b)});
        } catch (const std::exception&) {
            if (ln == 1) continue;  // header
            throw Error(Fault::input, path.string() + ":" + std::to_string(ln) + ": not a number");
        }
    }
    return pts;
}

RunConfig parse_config(const json& j, const fs::path& base) {
    RunConfig c;
    try {
        known_keys(j,
                   {"name", "boundary", "eps", "eps_sweep", "points", "points_file", "range", "samples", "seed", "grid",
                    "oracle_tolerance", "graph", "out", "minimize", "tolerances", "checks"},
                   "config");
        c.name = j.value("name", std::string("run"));
        const json& b = j.at("boundary");
        if (b.is_string()) {
            fs::path p = base / b.get<std::string>();
            std::ifstream in(p);
            if (!in) throw Error(Fault::input, "cannot open boundary file " + p.string());
            json bj;
            try {
                bj = json::parse(in);
            } catch (const json::parse_error& e) {
                throw Error(Fault::input, p.string() + ": " + e.what());
            }
            c.bf = boundary_from_json(bj);
        } else {
            c.bf = boundary_from_json(b);
        }
        if (j.contains("eps")) c.eps = positive(j, "eps", 0);
        if (j.contains("eps_sweep")) {
            const json& s = j.at("eps_sweep");
            EpsSweep sw{json_real(s.at("from")), json_real(s.at("to")), s.value("samples", 10)};
            if (!(sw.from > 0) || !(sw.to >= sw.from) || sw.samples < 1) throw Error(Fault::input, "bad eps_sweep");
            c.sweep = sw;
        }
        if (j.contains("points"))
            for (const auto& p : j.at("points")) c.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        if (j.contains("points_file")) {
            auto more = read_points_csv(base / j.at("points_file").get<std::string>());
            c.points.insert(c.points.end(), more.begin(), more.end());
        }
        if (j.contains("range")) {
            c.x_lo = j.at("range").at(0).get<double>();
            c.x_hi = j.at("range").at(1).get<double>();
            if (!(c.x_hi > c.x_lo)) throw Error(Fault::input, "empty range");
        }
        c.samples = count(j, "samples", c.samples);
        c.seed = j.value("seed", std::uint64_t(1));
        if (j.contains("grid")) {
            const json& g = j.at("grid");
            known_keys(g, {"x_lo", "x_hi", "n1", "n2", "window"}, "grid");
            GridDomain gd;
            gd.x_lo = g.value("x_lo", c.x_lo);
            gd.x_hi = g.value("x_hi", c.x_hi);
            gd.n1 = g.value("n1", gd.n1);
            gd.n2 = g.value("n2", gd.n2);
            gd.window = g.value("window", 0);
            c.grid = gd;
        }
        if (j.contains("oracle_tolerance")) {
            const json& t = j.at("oracle_tolerance");
            c.oracle_abs = positive(t, "abs", inf);
            c.oracle_rel = positive(t, "rel", inf);
        }
        if (j.contains("graph")) c.graph = base / j.at("graph").get<std::string>();
        if (j.contains("out")) c.out = j.at("out").get<std::string>();
        c.minimize = j.value("minimize", false);
        PropertyOptions& po = c.properties;
        po.x_lo = c.x_lo;
        po.x_hi = c.x_hi;
        po.seed = c.seed;
        po.optimizer_points = c.samples;
        if (j.contains("tolerances")) {
            const json& t = j.at("tolerances");
            known_keys(t, {"boundary", "concavity", "gradient", "monge_ampere"}, "tolerances");
            po.boundary_tol = positive(t, "boundary", po.boundary_tol);
            po.concavity_tol = positive(t, "concavity", po.concavity_tol);
            po.gradient_tol = positive(t, "gradient", po.gradient_tol);
            po.monge_ampere_tol = positive(t, "monge_ampere", po.monge_ampere_tol);
        }
        if (j.contains("checks")) {
            const json& k = j.at("checks");
            known_keys(k, {"boundary_points", "locate_points", "segments", "monge_ampere_points", "optimizer_points"},
                       "checks");
            po.boundary_points = count(k, "boundary_points", po.boundary_points);
            po.locate_points = count(k, "locate_points", po.locate_points);
            po.segments = count(k, "segments", po.segments);
            po.monge_ampere_points = count(k, "monge_ampere_points", po.monge_ampere_points);
            po.optimizer_points = count(k, "optimizer_points", po.optimizer_points);
        }
    } catch (const json::exception& e) {
        throw Error(Fault::input, std::string("malformed config: ") + e.what());
    }
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Fault::input, "cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(Fault::input, path.string() + ": " + e.what());
    }
    RunConfig c = parse_config(j, path.parent_path());
    c.path = path;
    return c;
}

}  // namespace bellman
