#include "bellman/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

#include "bellman/config.hpp"
#include "bellman/evolution.hpp"
#include "bellman/optimizers.hpp"
#include "bellman/oracle.hpp"
#include "bellman/verify.hpp"

namespace bellman {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(Fault f) {
    switch (f) {
        case Fault::input:
        case Fault::out_of_domain:
        case Fault::outside_strip:
        case Fault::degenerate_transform: return exit_input;
        case Fault::non_alternating_signs:
        case Fault::divergent:
        case Fault::eps_too_large: return exit_condition;
        case Fault::iteration_cap: return exit_iteration_cap;
        default: return exit_verification;
    }
}

namespace {

struct Options {
    std::string command;
    std::string config;
    std::optional<double> eps;
    std::optional<std::string> out;
    int jobs = 1;
    bool minimize = false;
};

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void write_file(const fs::path& p, const std::function<void(std::ostream&)>& body) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw Error(Fault::input, "cannot write " + p.string());
    body(os);
}

void write_json(const fs::path& p, const json& j) {
    write_file(p, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

class Runner {
public:
    Runner(const Options& o, std::ostream& out, std::ostream& err) : o_(o), out_(out), err_(err) {}

    int run() {
        cfg_ = load_config(o_.config);
        if (o_.eps) cfg_.eps = *o_.eps;
        if (o_.out) cfg_.out = *o_.out;
        if (o_.minimize) cfg_.minimize = true;
        bf_ = cfg_.minimize ? minimize_variant(cfg_.bf) : cfg_.bf;
        sign_ = cfg_.minimize ? -1 : 1;
        const std::string& c = o_.command;
        if (c == "analyze") return analyze();
        if (c == "evolve") return evolve_cmd();
        if (c == "eval") return eval_cmd();
        if (c == "optimize") return optimize_cmd();
        if (c == "verify") return verify_cmd();
        return export_cmd();
    }

private:
    const Options& o_;
    std::ostream& out_;
    std::ostream& err_;
    RunConfig cfg_;
    BoundaryFunction bf_;
    int sign_ = 1;

    // condition failure when eps is outside (0, eps_inf)
    bool eps_ok(double eps) {
        if (eps < bf_.eps_inf()) return true;
        err_ << "eps = " << num(eps) << " is not below eps_inf = " << num(bf_.eps_inf()) << '\n';
        return false;
    }

    EvolutionTrace trace(double eps) {
        try {
            return evolve(bf_, eps);
        } catch (const IterationCapExceeded& e) {
            write_json(cfg_.out / "trace_partial.json", trace_to_json(e.trace));
            throw;
        }
    }

    FoliationGraph graph(double eps) {
        if (cfg_.graph) {
            std::ifstream in(*cfg_.graph);
            if (!in) throw Error(Fault::input, "cannot open graph " + cfg_.graph->string());
            json j;
            try {
                j = json::parse(in);
            } catch (const json::parse_error& e) {
                throw Error(Fault::input, cfg_.graph->string() + ": " + e.what());
            }
            return graph_from_json(j.contains("graph") ? j.at("graph") : j, bf_);
        }
        return trace(eps).final_graph();
    }

    void check_points(const std::vector<Point>& pts, double eps) {
        for (const auto& x : pts) {
            double h = x.x2 - x.x1 * x.x1;
            double tol = 1e-12 * (1 + std::abs(x.x2));
            if (h < -tol || h > eps * eps + tol)
                throw Error(Fault::outside_strip, "point (" + num(x.x1) + ", " + num(x.x2) + ") is outside the strip");
        }
    }

    std::vector<Point> points_or_samples(double eps) {
        if (!cfg_.points.empty()) return cfg_.points;
        std::mt19937_64 rng(cfg_.seed);
        std::vector<Point> pts;
        for (int i = 0; i < cfg_.samples; ++i) pts.push_back(random_strip_point(rng, cfg_.x_lo, cfg_.x_hi, eps));
        return pts;
    }

    int analyze() {
        ConditionReport rep = check_conditions(cfg_.bf, cfg_.bf.eps_inf());
        json j;
        j["name"] = cfg_.name;
        j["boundary"] = boundary_to_json(cfg_.bf);
        j["essential_roots"] = rep.essential_roots;
        j["weighted_variation"] = real_json(rep.weighted_variation);
        json entries = json::array();
        out_ << cfg_.name << ": " << rep.essential_roots << " essential roots\n";
        auto show = [&](const char* tag, const std::vector<Root>& rs) {
            for (const auto& r : rs)
                out_ << "  " << tag << " " << (r.is_point() ? num(r.lo) : "[" + num(r.lo) + ", " + num(r.hi) + "]")
                     << '\n';
        };
        show("c", cfg_.bf.roots().c);
        show("v", cfg_.bf.roots().v);
        bool pass = rep.pass();
        for (const auto& e : rep.entries) {
            out_ << (e.pass ? "PASS " : "FAIL ") << e.name << "  " << e.detail << '\n';
            entries.push_back({{"name", e.name}, {"pass", e.pass}, {"detail", e.detail}});
        }
        if (cfg_.eps || cfg_.sweep) {
            double eps = cfg_.run_eps();
            bool ok = eps < cfg_.bf.eps_inf();
            out_ << (ok ? "PASS " : "FAIL ") << "eps " << num(eps) << " below eps_inf " << num(cfg_.bf.eps_inf()) << '\n';
            entries.push_back({{"name", "eps below eps_inf"}, {"pass", ok}, {"detail", num(eps)}});
            pass = pass && ok;
        }
        j["checks"] = entries;
        j["pass"] = pass;
        write_json(cfg_.out / "analysis.json", j);
        return pass ? exit_ok : exit_condition;
    }

    int evolve_cmd() {
        double eps = cfg_.run_eps();
        if (!eps_ok(eps)) return exit_condition;
        EvolutionTrace tr = trace(eps);
        write_json(cfg_.out / "trace.json", trace_to_json(tr));
        write_json(cfg_.out / "graph.json", graph_to_json(tr.final_graph()));
        write_file(cfg_.out / "criticals.csv", [&](std::ostream& os) { write_criticals_csv(os, tr); });
        out_ << cfg_.name << ": evolved from " << num(tr.eps_start) << " to " << num(eps) << ", "
             << tr.criticals.size() << " critical points\n";
        for (const auto& c : tr.criticals) {
            out_ << "  eps* = " << num(c.eps) << (c.essential ? "  essential" : "") << " ";
            for (const auto& e : c.events) out_ << ' ' << e.describe();
            out_ << '\n';
        }
        if (cfg_.sweep) {
            write_file(cfg_.out / "sweep.csv", [&](std::ostream& os) {
                os << "eps,vertices\n";
                for (double e : cfg_.sweep->values()) {
                    FoliationGraph g = graph_at(tr, e);
                    os << num(e) << ',';
                    for (size_t i = 0; i < g.chain.size(); ++i) os << (i ? ";" : "") << node_kind_name(g.chain[i].kind);
                    os << '\n';
                }
            });
        }
        for (const auto& w : tr.warnings) err_ << "warning: " << w << '\n';
        return exit_ok;
    }

    template <class F>
    void parallel(size_t n, F f) {
        int jobs = std::max(1, o_.jobs);
        if (jobs == 1 || n < 2) {
            for (size_t i = 0; i < n; ++i) f(i);
            return;
        }
        std::vector<std::thread> th;
        std::vector<std::exception_ptr> errs(jobs);
        for (int k = 0; k < jobs; ++k)
            th.emplace_back([&, k] {
                try {
                    for (size_t i = k; i < n; i += jobs) f(i);
                } catch (...) {
                    errs[k] = std::current_exception();
                }
            });
        for (auto& t : th) t.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }

    int eval_cmd() {
        if (cfg_.points.empty()) throw Error(Fault::input, "eval needs \"points\" or \"points_file\"");
        std::vector<double> list = cfg_.sweep && !cfg_.eps ? cfg_.sweep->values() : std::vector<double>{cfg_.run_eps()};
        for (double e : list)
            if (!eps_ok(e)) return exit_condition;
        EvolutionTrace tr = trace(list.back());
        std::ostringstream csv;
        csv << std::setprecision(17);
        bool sweep = list.size() > 1;
        csv << (sweep ? "eps," : "") << "x1,x2,B,dB1,dB2\n";
        for (double eps : list) {
            check_points(cfg_.points, eps);
            BellmanCandidate bc = assemble(sweep ? graph_at(tr, eps) : tr.final_graph());
            std::vector<Eval> ev(cfg_.points.size());
            parallel(cfg_.points.size(), [&](size_t i) { ev[i] = bc.eval(cfg_.points[i]); });
            for (size_t i = 0; i < ev.size(); ++i) {
                if (sweep) csv << eps << ',';
                csv << cfg_.points[i].x1 << ',' << cfg_.points[i].x2 << ',' << sign_ * ev[i].B << ',' << sign_ * ev[i].g1
                    << ',' << sign_ * ev[i].g2 << '\n';
            }
        }
        write_file(cfg_.out / "eval.csv", [&](std::ostream& os) { os << csv.str(); });
        out_ << csv.str();
        return exit_ok;
    }

    int optimize_cmd() {
        double eps = cfg_.run_eps();
        if (!eps_ok(eps)) return exit_condition;
        BellmanCandidate bc = assemble(graph(eps));
        std::vector<Point> pts = points_or_samples(eps);
        check_points(pts, eps);
        std::vector<json> rows(pts.size());
        std::vector<int> ok(pts.size(), 0);
        std::vector<Optimizer> phis(pts.size());
        parallel(pts.size(), [&](size_t i) {
            json row = {{"x", {pts[i].x1, pts[i].x2}}};
            try {
                phis[i] = optimizer_at(bc, pts[i]);
                OptimizerReport r = verify_optimizer(phis[i], pts[i], bc);
                row["optimizer"] = optimizer_to_json(phis[i]);
                row["report"] = {{"mean_error", r.mean_error}, {"square_error", r.square_error},
                                 {"f_error", r.f_error},       {"bmo", r.bmo},
                                 {"bmo_excess", r.bmo_excess}, {"B", sign_ * r.B},
                                 {"f_average", sign_ * r.f_average}, {"pass", r.pass}};
                ok[i] = r.pass;
            } catch (const Error& e) {
                row["error"] = e.what();
            }
            rows[i] = row;
        });
        json all = json::array();
        int failed = 0;
        for (size_t i = 0; i < pts.size(); ++i) {
            all.push_back(rows[i]);
            failed += !ok[i];
        }
        write_json(cfg_.out / "optimizers.json", {{"eps", eps}, {"minimize", cfg_.minimize}, {"points", all}});
        if (!cfg_.points.empty())
            for (size_t i = 0; i < pts.size(); ++i) {
                if (!ok[i] && !rows[i].contains("optimizer")) continue;
                write_file(cfg_.out / ("optimizer_" + std::to_string(i) + ".csv"),
                           [&](std::ostream& os) { write_optimizer_csv(os, phis[i]); });
                write_file(cfg_.out / ("delivery_" + std::to_string(i) + ".csv"),
                           [&](std::ostream& os) { write_delivery_csv(os, delivery_curve(phis[i], bc)); });
            }
        out_ << cfg_.name << ": " << pts.size() - failed << " of " << pts.size() << " optimizers certified\n";
        for (size_t i = 0; i < pts.size(); ++i)
            if (!ok[i]) out_ << "  failed at (" << num(pts[i].x1) << ", " << num(pts[i].x2) << "): " << rows[i].dump() << '\n';
        return failed ? exit_verification : exit_ok;
    }

    int verify_cmd() {
        double eps = cfg_.run_eps();
        if (!eps_ok(eps)) return exit_condition;
        FoliationGraph g = graph(eps);
        AdmissibleReport adm = check_admissible(g);
        if (!adm.pass()) {
            out_ << "FAIL admissible graph\n" << adm.failures() << '\n';
            write_json(cfg_.out / "verify.json", {{"pass", false}, {"admissible", adm.failures()}});
            return exit_verification;
        }
        BellmanCandidate bc = assemble(g);
        PropertyReport rep = run_properties(bc, cfg_.properties);
        if (cfg_.grid) {
            GridDomain gd = *cfg_.grid;
            gd.eps = eps;
            OracleOptions oo;
            oo.jobs = o_.jobs;
            oo.edge = [&](const Point& x) { return bc.eval(x).B; };
            GridValues V = grid_minimal_concave(bf_, eps, gd, oo);
            OracleComparison c = compare(bc, V);
            std::string at = "at (" + num(c.where.x1) + ", " + num(c.where.x2) + ")";
            rep.add("oracle max abs", c.max_abs, cfg_.oracle_abs, at);
            rep.add("oracle max rel", c.max_rel, cfg_.oracle_rel, at);
            rep.add("oracle below candidate", std::max(0.0, c.max_excess), 1e-9, std::to_string(V.sweeps) + " sweeps");
            write_file(cfg_.out / "oracle_grid.csv", [&](std::ostream& os) { write_grid_csv(os, V, bc); });
        }
        out_ << cfg_.name << " at eps = " << num(eps) << '\n';
        rep.print(out_);
        write_json(cfg_.out / "verify.json", rep.to_json());
        return rep.pass() ? exit_ok : exit_verification;
    }

    int export_cmd() {
        double eps = cfg_.run_eps();
        if (!eps_ok(eps)) return exit_condition;
        fs::create_directories(cfg_.out);
        FoliationGraph g;
        if (cfg_.graph) {
            g = graph(eps);
        } else {
            EvolutionTrace tr = trace(eps);
            g = tr.final_graph();
            write_file(cfg_.out / "criticals.csv", [&](std::ostream& os) { write_criticals_csv(os, tr); });
        }
        BellmanCandidate bc = assemble(g);
        write_file(cfg_.out / "foliation.svg", [&](std::ostream& os) { write_svg(os, bc, cfg_.x_lo, cfg_.x_hi); });
        write_file(cfg_.out / "boundaries.csv", [&](std::ostream& os) { write_boundaries_csv(os, bc); });
        write_json(cfg_.out / "graph.json", graph_to_json(g));
        out_ << "wrote " << (cfg_.out / "foliation.svg").string() << '\n';
        return exit_ok;
    }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bellman functions on BMO: foliation, evolution, optimizers"};
    app.require_subcommand(1);
    Options o;
    for (const char* name : {"analyze", "evolve", "eval", "optimize", "verify", "export"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", o.config, "run configuration (JSON)")->required();
        sub->add_option("--eps", o.eps, "radius, overrides the config");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--minimize", o.minimize, "minimal Bellman function instead of the maximal one");
        sub->callback([&o, name] { o.command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o1, o2;
        int code = app.exit(e, o1, o2);
        out << o1.str();
        err << o2.str();
        return code == 0 ? exit_ok : exit_usage;
    }
    try {
        Runner r(o, out, err);
        return r.run();
    } catch (const IterationCapExceeded& e) {
        err << "iteration cap: " << e.what() << '\n';
        return exit_iteration_cap;
    } catch (const Error& e) {
        err << fault_name(e.fault()) << ": " << e.what() << '\n';
        return exit_code_for(e.fault());
    } catch (const json::exception& e) {
        err << "input: " << e.what() << '\n';
        return exit_input;
    } catch (const fs::filesystem_error& e) {
        err << "input: " << e.what() << '\n';
        return exit_input;
    }
}

}  // namespace bellman
