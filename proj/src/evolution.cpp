#include "bellman/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/math/tools/roots.hpp>

namespace bellman {

using nlohmann::json;

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::edge_zero: return "edge-length-zero";
        case EventKind::base_zero: return "trolleybus-base-zero";
        case EventKind::multicup_full: return "multicup-fills";
        case EventKind::birdie_split: return "birdie-split";
        case EventKind::angle_lost: return "angle-lost";
        case EventKind::base_lost: return "base-lost";
        case EventKind::table_exhausted: return "differential-zero";
        case EventKind::tail_short: return "tail-meets-figure";
    }
    return "event";
}

std::string Event::describe() const {
    std::ostringstream os;
    os << event_kind_name(kind) << '@' << index;
    return os.str();
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::optional<double> refine(const std::function<double(double)>& G, double a, double b, double ga, double gb) {
    if (ga == 0) return a;
    if (gb == 0) return b;
    boost::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(G, a, b, ga, gb, boost::math::tools::eps_tolerance<double>(50), it);
    return 0.5 * (r.first + r.second);
}

// base length in (l_lo, l_hi] solving G = 0, preferring the root nearest l_prev
std::optional<double> track_base(const std::function<std::optional<double>(double)>& G, double l_lo, double l_hi,
                                 double l_prev) {
    auto Gd = [&](double l) {
        auto v = G(l);
        return v ? *v : std::nan("");
    };
    const double floor_l = l_lo + 1e-14 * (1 + l_hi);
    if (l_prev > l_lo && l_prev <= l_hi * (1 + 1e-12)) {
        for (double d : {1e-7, 1e-5, 1e-3, 1e-2, 5e-2, 0.2}) {
            double a = std::max(floor_l, l_prev - d * l_prev), b = std::min(l_hi, l_prev + d * l_prev);
            if (!(a < b)) continue;
            auto ga = G(a), gb = G(b);
            if (!ga || !gb) continue;
            if ((*ga <= 0) != (*gb <= 0) || *ga == 0 || *gb == 0) {
                if (*gb == 0) return b;
                if (*ga == 0) return a > floor_l ? std::optional<double>(a) : std::nullopt;
                return refine(Gd, a, b, *ga, *gb);
            }
        }
    }
    std::vector<double> grid;
    double span = l_hi - l_lo;
    for (int k = 0; k <= 64; ++k) grid.push_back(l_lo + span * k / 64);
    for (int j = 7; j <= 42; ++j) grid.push_back(l_lo + span * std::ldexp(1.0, -j));
    if (l_prev > l_lo && l_prev < l_hi) grid.push_back(l_prev);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::vector<std::pair<double, double>> vals;
    for (double l : grid)
        if (auto v = G(l)) vals.push_back({l, *v});
    std::optional<double> best;
    for (size_t k = 0; k + 1 < vals.size(); ++k) {
        auto [a, ga] = vals[k];
        auto [b, gb] = vals[k + 1];
        std::optional<double> r;
        if (gb == 0)
            r = b;
        else if ((ga < 0) != (gb < 0) && ga != 0)
            r = refine(Gd, a, b, ga, gb);
        if (!r || *r <= floor_l) continue;
        double target = l_prev > 0 ? l_prev : l_hi;
        if (!best || std::abs(*r - target) < std::abs(*best - target)) best = r;
    }
    return best;
}

std::optional<double> guarded(const std::function<double()>& fn) {
    try {
        double v = fn();
        if (std::isfinite(v)) return v;
    } catch (const Error&) {
    }
    return std::nullopt;
}

}  // namespace

SolveResult solve_graph(const FoliationGraph& prev, double eps) {
    SolveResult res;
    res.graph = prev;
    FoliationGraph& g = res.graph;
    g.eps = eps;
    const BoundaryFunction& bf = *g.bf;
    const size_t n = g.chain.size();
    std::vector<bool> bad(n, false);
    auto fail = [&](EventKind k, int i, double v) {
        res.failures.push_back({k, i, v});
        if (i >= 0 && size_t(i) < n) bad[i] = true;
    };
    auto monitor = [&](EventKind k, int i, double v) {
        res.monitors.push_back({k, i, v});
        if (!(v > 0)) fail(k, i, v);
    };

    for (size_t i = 0; i < n; ++i) {
        Node& nd = g.chain[i];
        if (nd.kind == NodeKind::long_chord) {
            const auto& T = *nd.stack.table;
            double l = 2 * eps;
            double room = T.stop == TableStop::reached_l_max ? 1.0 : T.l_max - l;
            if (l > T.l_max + 1e-12 * (1 + l)) {
                fail(EventKind::table_exhausted, int(i), T.l_max - l);
                continue;
            }
            nd.stack.cut(std::min(l, T.l_max));
            res.monitors.push_back({EventKind::table_exhausted, int(i), room});
        } else if (nd.kind == NodeKind::multicup) {
            double span = nd.right() - nd.left();
            if (std::isfinite(span)) monitor(EventKind::multicup_full, int(i), span - 2 * eps);
        }
    }

    auto right_base = [&](size_t i, double l_prev) -> std::optional<double> {
        if (i == 0 || bad[i - 1] || !g.chain[i - 1].emits_right()) return std::nullopt;
        Force F = g.right_emission(i - 1);
        const auto& T = *g.chain[i].stack.table;
        auto G = [&](double l) {
            return guarded([&] {
                Chord c = T.chord_at(l);
                return F.eval(c.a) - c.dl;
            });
        };
        return track_base(G, T.l_min, std::min(2 * eps, T.l_max), l_prev);
    };
    auto left_base = [&](size_t i, double l_prev) -> std::optional<double> {
        if (i + 1 >= n || bad[i + 1] || !g.chain[i + 1].emits_left()) return std::nullopt;
        Force F = g.left_emission(i + 1);
        const auto& T = *g.chain[i].stack.table;
        auto G = [&](double l) {
            return guarded([&] {
                Chord c = T.chord_at(l);
                return F.eval(c.b) + c.dr;
            });
        };
        return track_base(G, T.l_min, std::min(2 * eps, T.l_max), l_prev);
    };

    for (size_t i = 0; i < n; ++i) {
        Node& nd = g.chain[i];
        if (nd.kind != NodeKind::trolleybus_r && nd.kind != NodeKind::birdie) continue;
        double prev_l = nd.kind == NodeKind::birdie ? nd.l_right : nd.stack.l_top;
        auto l = right_base(i, prev_l);
        if (!l) {
            fail(EventKind::base_lost, int(i), prev_l);
            continue;
        }
        if (nd.kind == NodeKind::birdie) {
            nd.l_right = *l;
        } else {
            nd.stack.cut(*l);
            monitor(EventKind::base_zero, int(i), *l - nd.stack.table->l_min);
        }
    }
    for (size_t k = n; k-- > 0;) {
        Node& nd = g.chain[k];
        if (nd.kind != NodeKind::trolleybus_l && nd.kind != NodeKind::birdie) continue;
        if (bad[k]) continue;
        double prev_l = nd.kind == NodeKind::birdie ? nd.l_left : nd.stack.l_top;
        auto l = left_base(k, prev_l);
        if (!l) {
            fail(EventKind::base_lost, int(k), prev_l);
            continue;
        }
        if (nd.kind == NodeKind::birdie) {
            nd.l_left = *l;
            double base = std::min(nd.l_right, nd.l_left);
            nd.stack.cut(base);
            monitor(EventKind::base_zero, int(k), base - nd.stack.table->l_min);
            monitor(EventKind::birdie_split, int(k), 1e-8 * (1 + base) - std::abs(nd.l_right - nd.l_left));
        } else {
            nd.stack.cut(*l);
            monitor(EventKind::base_zero, int(k), *l - nd.stack.table->l_min);
        }
    }

    for (size_t i = 0; i < n; ++i) {
        Node& nd = g.chain[i];
        if (nd.kind != NodeKind::angle) continue;
        if (i == 0 || i + 1 >= n || bad[i - 1] || bad[i + 1]) {
            bad[i] = true;
            continue;
        }
        std::optional<double> w;
        try {
            w = balance_root(g.right_emission(i - 1), g.left_emission(i + 1), g.chain[i - 1].right(),
                             g.chain[i + 1].left());
        } catch (const Error&) {
            w.reset();
        }
        if (!w) {
            fail(EventKind::angle_lost, int(i), nd.w);
            continue;
        }
        nd.w = *w;
    }

    for (size_t i = 0; i + 1 < n; ++i) {
        if (bad[i] || bad[i + 1]) continue;
        double lo = g.edge_lo(i), hi = g.edge_hi(i);
        if (std::isfinite(lo) && std::isfinite(hi)) monitor(EventKind::edge_zero, int(i), hi - lo);
        if (bf.is_quadratic()) continue;
        Side s = g.edge_side(i);
        double t = tail_endpoint(g.edge_force(i)).endpoint;
        double room = s == Side::right ? t - hi : lo - t;
        if (std::isnan(room)) room = 1;  // both ends at the same infinity
        monitor(EventKind::tail_short, int(i), room);
    }
    return res;
}

FoliationGraph simple_picture(const BoundaryFunction& bf, double eps, double l_cap) {
    if (!(eps > 0)) throw Error(Fault::input, "eps must be positive");
    if (l_cap <= 0) l_cap = 2.1 * eps;
    FoliationGraph g;
    g.bf = &bf;
    g.eps = eps;
    const auto& rs = bf.roots();
    auto end = [](bool left, bool source) {
        Node n;
        n.kind = NodeKind::end;
        n.left_side = left;
        n.source = source;
        return n;
    };
    if (rs.c.empty()) {
        g.chain = {end(true, false), end(false, true)};
    }
    for (size_t k = 0; k < rs.c.size(); ++k) {
        const Root& c = rs.c[k];
        if (c.lo == -inf && c.hi == -inf) {
            g.chain.push_back(end(true, true));
            if (rs.c.size() == 1) g.chain.push_back(end(false, false));
        } else if (c.lo == inf && c.hi == inf) {
            if (rs.c.size() == 1) g.chain.push_back(end(true, false));
            g.chain.push_back(end(false, true));
        } else {
            if (k == 0 && c.lo != -inf) g.chain.push_back(end(true, false));
            Node n;
            if (c.is_point()) {
                auto T = grow_chordal_domain(bf, GrowSeed::at_point(c.lo), l_cap);
                if (T->l_max < 2 * eps) {
                    throw Error(Fault::eps_too_large,
                                "cup at " + fmt(c.lo) + " cannot become full at eps " + fmt(eps));
                }
                n.kind = NodeKind::long_chord;
                n.stack = make_stack(T, 2 * eps);
            } else {
                n.kind = NodeKind::multicup;
                n.arcs = {{c.lo, c.hi}};
                n.beta2 = 0.5 * bf.d(2, std::isfinite(c.lo) ? c.lo : c.hi);
            }
            g.chain.push_back(std::move(n));
            if (k + 1 == rs.c.size() && c.hi != inf) g.chain.push_back(end(false, false));
        }
        if (k < rs.v.size()) {
            Node a;
            a.kind = NodeKind::angle;
            a.w = rs.v[k].mid();
            g.chain.push_back(a);
        }
    }
    SolveResult r = solve_graph(g, eps);
    if (!r.ok()) {
        std::string why;
        for (const auto& f : r.failures) why += " " + f.describe() + "=" + fmt(f.value);
        throw Error(Fault::eps_too_large, "simple picture not admissible at eps " + fmt(eps) + ":" + why);
    }
    return r.graph;
}

std::vector<const CriticalPoint*> EvolutionTrace::essential() const {
    std::vector<const CriticalPoint*> out;
    for (const auto& c : criticals)
        if (c.essential) out.push_back(&c);
    return out;
}

namespace {

Node make_node(NodeKind k, const Stack& s) {
    Node n;
    n.kind = k;
    n.stack = s;
    n.l_right = n.l_left = s.l_top;
    return n;
}

Node multicup_of(const BoundaryFunction& bf, std::vector<Arc> arcs, std::vector<Stack> chords) {
    Node n;
    n.kind = NodeKind::multicup;
    n.arcs = std::move(arcs);
    n.chords = std::move(chords);
    const Chord& c = n.chords.front().top();
    n.beta2 = chord_coefficients(bf, c.a, c.b).b2;
    return n;
}

struct Modifier {
    const BoundaryFunction& bf;
    double l_cap;
    std::vector<std::string> changes;
    bool essential = false;

    [[noreturn]] void unknown(const std::string& what) {
        throw Error(Fault::unknown_configuration, "no modification rule for " + what);
    }

    // replacement for two nodes joined by a vanished edge
    std::vector<Node> merge(const Node& L, const Node& R) {
        auto name = std::string(node_kind_name(L.kind)) + " + " + node_kind_name(R.kind);
        auto record = [&](const std::vector<Node>& out) {
            std::string s = name + " ->";
            for (const auto& n : out) s += std::string(" ") + node_kind_name(n.kind);
            changes.push_back(s);
            return out;
        };
        if (L.kind == NodeKind::angle && R.kind == NodeKind::long_chord)
            return record({make_node(NodeKind::trolleybus_r, R.stack)});
        if (L.kind == NodeKind::long_chord && R.kind == NodeKind::angle)
            return record({make_node(NodeKind::trolleybus_l, L.stack)});
        if (L.kind == NodeKind::trolleybus_r && R.kind == NodeKind::angle)
            return record({make_node(NodeKind::birdie, L.stack)});
        if (L.kind == NodeKind::angle && R.kind == NodeKind::trolleybus_l)
            return record({make_node(NodeKind::birdie, R.stack)});
        bool stackish_l = L.kind == NodeKind::trolleybus_l || L.kind == NodeKind::long_chord;
        bool stackish_r = R.kind == NodeKind::trolleybus_r || R.kind == NodeKind::long_chord;
        if (stackish_l && stackish_r && !(L.kind == NodeKind::trolleybus_l && R.kind == NodeKind::trolleybus_r)) {
            essential = true;
            const Chord& a = L.stack.top();
            const Chord& b = R.stack.top();
            return record({multicup_of(bf, {{a.a, a.a}, {a.b, a.b}, {b.b, b.b}}, {L.stack, R.stack})});
        }
        if (L.kind == NodeKind::multicup && R.kind == NodeKind::trolleybus_r && std::isfinite(L.right())) {
            essential = true;
            Node m = L;
            m.arcs.push_back({R.stack.top().b, R.stack.top().b});
            m.chords.push_back(R.stack);
            return record({m});
        }
        if (L.kind == NodeKind::trolleybus_l && R.kind == NodeKind::multicup && std::isfinite(R.left())) {
            essential = true;
            Node m = R;
            m.arcs.insert(m.arcs.begin(), Arc{L.stack.top().a, L.stack.top().a});
            m.chords.insert(m.chords.begin(), L.stack);
            return record({m});
        }
        unknown(name);
    }

    std::vector<Node> base_zero(const Node& n) {
        essential = true;
        if (n.kind == NodeKind::trolleybus_r || n.kind == NodeKind::trolleybus_l) {
            changes.push_back(std::string(node_kind_name(n.kind)) + " vanishes");
            return {};
        }
        if (n.kind == NodeKind::birdie && n.stack.table->kind == TableKind::cup_from_point) {
            Node a;
            a.kind = NodeKind::angle;
            a.w = n.stack.table->origin;
            changes.push_back("birdie -> angle");
            return {a};
        }
        unknown(std::string("vanishing base of ") + node_kind_name(n.kind));
    }

    std::vector<Node> fill(const Node& n) {
        essential = true;
        auto base = std::make_shared<ClosedMulticup>();
        base->arcs = n.arcs;
        base->stacks = n.chords;
        base->beta2 = n.beta2;
        double p = n.left(), q = n.right();
        auto T = grow_chordal_domain(bf, GrowSeed::over(make_chord(bf, p, q), TableKind::over_multicup_hull),
                                     std::max(l_cap, 1.05 * (q - p)));
        Node lc;
        lc.kind = NodeKind::long_chord;
        lc.stack = make_stack(T, T->l_min, base);
        changes.push_back("multicup closes -> long_chord over closed_multicup");
        return {lc};
    }

    // the angle at chain[i] ran off to an infinity; the end on that side stops emitting tangents
    std::vector<Node> escape(const FoliationGraph& g, int i, std::vector<Node>& chain) {
        double w = g.chain[i].w;
        const Root* home = nullptr;
        for (const auto& r : bf.roots().v)
            if (!home || std::abs(r.mid() - w) < std::abs(home->mid() - w)) home = &r;
        bool right = home ? w > home->hi : w > 0;
        size_t k = right ? size_t(i) + 1 : size_t(i) - 1;
        if (chain[k].kind != NodeKind::end || std::isfinite(right ? chain[k].left() : chain[k].right()))
            unknown("angle lost away from an infinity");
        chain[k].source = false;
        changes.push_back(std::string("angle escapes to ") + (right ? "+inf" : "-inf"));
        return {};
    }

    std::vector<Node> split(const Node& n, const Node& solved) {
        double lr = solved.l_right, ll = solved.l_left;
        Stack s = n.stack;
        Node a;
        a.kind = NodeKind::angle;
        if (lr < ll) {
            s.cut(lr);
            a.w = s.top().b;
            changes.push_back("birdie -> trolleybus_R + angle");
            return {make_node(NodeKind::trolleybus_r, s), a};
        }
        s.cut(ll);
        a.w = s.top().a;
        changes.push_back("birdie -> angle + trolleybus_L");
        return {a, make_node(NodeKind::trolleybus_l, s)};
    }
};

double near_tol(double eps) { return 1e-7 * (1 + eps); }

// events at a crash from the last healthy solve and the first failing one
std::vector<Event> classify(const SolveResult& ok, const SolveResult& bad) {
    const FoliationGraph& g = ok.graph;
    const double tol = near_tol(g.eps);
    std::vector<Event> ev;
    auto add = [&](Event e) {
        for (const auto& x : ev)
            if (x.kind == e.kind && x.index == e.index) return;
        ev.push_back(e);
    };
    for (const auto& f : bad.failures) {
        if (f.kind == EventKind::angle_lost) {
            int i = f.index;
            double wl = g.chain[i].w - g.chain[i - 1].right();
            double wr = g.chain[i + 1].left() - g.chain[i].w;
            if ((std::isinf(wl) || std::isinf(wr)) && std::min(wl, wr) > 1e-3 * (1 + g.eps)) {
                // no finite neighbour to crash into: the vertex runs off to an infinity
                add(f);
                continue;
            }
            if (wl <= wr || wl <= tol) add({EventKind::edge_zero, i - 1, wl});
            if (wr < wl || wr <= tol) add({EventKind::edge_zero, i, wr});
        } else if (f.kind == EventKind::base_lost) {
            const Node& nd = g.chain[f.index];
            double l = nd.stack.l_top - nd.stack.table->l_min;
            if (l <= 1e-3 * (1 + g.eps))
                add({EventKind::base_zero, f.index, l});
            else
                add(f);
        } else {
            add(f);
        }
    }
    for (const auto& m : ok.monitors)
        if (m.value <= tol && m.kind != EventKind::birdie_split) add(m);
    return ev;
}

FoliationGraph modify(const SolveResult& ok, const SolveResult& bad, const std::vector<Event>& events, double l_cap,
                      std::vector<std::string>& changes, bool& essential) {
    const FoliationGraph& g0 = ok.graph;
    Modifier mod{*g0.bf, l_cap, {}, false};
    std::map<int, std::vector<Node>> replace;
    std::set<int> zero_edges, escaped;
    for (const auto& e : events) {
        switch (e.kind) {
            case EventKind::edge_zero: zero_edges.insert(e.index); break;
            case EventKind::base_zero: replace[e.index] = mod.base_zero(g0.chain[e.index]); break;
            case EventKind::multicup_full: replace[e.index] = mod.fill(g0.chain[e.index]); break;
            case EventKind::angle_lost: escaped.insert(e.index); break;
            case EventKind::birdie_split:
                replace[e.index] = mod.split(g0.chain[e.index], bad.graph.chain[e.index]);
                break;
            default: mod.unknown(e.describe());
        }
    }
    std::vector<Node> chain = g0.chain;
    for (int i : escaped) {
        if (zero_edges.count(i) || zero_edges.count(i - 1)) mod.unknown("angle escaping next to a vanished edge");
        replace[i] = mod.escape(g0, i, chain);
    }
    // merge runs of vanished edges left to right
    std::vector<Node> out;
    std::vector<bool> pending;  // true when the edge to the next node vanished
    for (size_t i = 0; i < chain.size(); ++i) {
        bool z = zero_edges.count(int(i)) > 0;
        if (replace.count(int(i))) {
            if (z || zero_edges.count(int(i) - 1)) mod.unknown("simultaneous crash around a vanishing figure");
            for (auto& n : replace[int(i)]) {
                out.push_back(n);
                pending.push_back(false);
            }
            continue;
        }
        if (!out.empty() && !pending.empty() && pending.back()) {
            Node left = out.back();
            out.pop_back();
            pending.pop_back();
            auto merged = mod.merge(left, chain[i]);
            for (size_t k = 0; k < merged.size(); ++k) {
                out.push_back(merged[k]);
                pending.push_back(false);
            }
            if (!pending.empty()) pending.back() = z;
            continue;
        }
        out.push_back(chain[i]);
        pending.push_back(z);
    }
    FoliationGraph g = g0;
    g.chain = std::move(out);
    for (size_t i = 0; i + 1 < g.chain.size(); ++i) {
        try {
            g.edge_side(i);
        } catch (const Error& e) {
            throw Error(Fault::unknown_configuration, std::string("modified graph is not a chain: ") + e.what());
        }
    }
    changes.insert(changes.end(), mod.changes.begin(), mod.changes.end());
    essential = essential || mod.essential;
    return g;
}

}  // namespace

EvolutionTrace evolve(const BoundaryFunction& bf, double eps_target, const EvolveOptions& opt) {
    if (!(eps_target > 0)) throw Error(Fault::input, "eps must be positive");
    if (!(eps_target < bf.eps_inf())) {
        throw Error(Fault::input, "eps " + fmt(eps_target) + " is not below eps_inf " + fmt(bf.eps_inf()));
    }
    double gap = bf.root_gap();
    if (!std::isfinite(gap) || gap <= 0) gap = 1;
    const double l_cap = 2.1 * eps_target + 1e-3;

    EvolutionTrace tr;
    tr.eps_target = eps_target;
    double eps = std::min(eps_target, gap / 8);
    FoliationGraph cur;
    for (int k = 0;; ++k) {
        try {
            cur = simple_picture(bf, eps, l_cap);
            break;
        } catch (const Error& e) {
            if (e.fault() != Fault::eps_too_large || k >= 40) throw;
            eps /= 2;
        }
    }
    tr.eps_start = eps;
    Segment seg;
    seg.eps_lo = eps;
    seg.samples.push_back(cur);
    SolveResult cur_res = solve_graph(cur, eps);
    std::map<long, int> per_unit;
    int steps = 0;

    while (eps < eps_target) {
        if (++steps > opt.max_steps) {
            seg.eps_hi = eps;
            tr.segments.push_back(seg);
            throw IterationCapExceeded("evolution step cap reached at eps " + fmt(eps), tr);
        }
        double d = std::min({eps / 8, gap / 4, eps_target - eps});
        double next = eps_target - eps - d <= 1e-14 ? eps_target : eps + d;
        SolveResult r = solve_graph(cur, next);
        if (r.ok()) {
            cur = r.graph;
            cur_res = r;
            eps = next;
            seg.samples.push_back(cur);
            continue;
        }
        double lo = eps, hi = next;
        SolveResult rlo = cur_res, rhi = r;
        while (hi - lo > opt.bisect_tol) {
            double mid = 0.5 * (lo + hi);
            SolveResult rm = solve_graph(rlo.graph, mid);
            if (rm.ok()) {
                lo = mid;
                rlo = rm;
            } else {
                hi = mid;
                rhi = rm;
            }
        }
        if (lo > seg.samples.back().eps) seg.samples.push_back(rlo.graph);
        seg.eps_hi = lo;
        tr.segments.push_back(seg);

        CriticalPoint cp;
        cp.eps = 0.5 * (lo + hi);
        cp.before = rlo.graph;
        cp.events = classify(rlo, rhi);
        FoliationGraph g = modify(rlo, rhi, cp.events, l_cap, cp.changes, cp.essential);
        SolveResult after = solve_graph(g, hi);
        for (int cascade = 0; !after.ok(); ++cascade) {
            if (cascade >= 4) {
                std::string why;
                for (const auto& f : after.failures) why += " " + f.describe();
                throw Error(Fault::unknown_configuration, "modified graph fails at eps " + fmt(hi) + ":" + why);
            }
            SolveResult base{g, {}, {}};
            auto more = classify(base, after);
            for (const auto& e : more) cp.events.push_back(e);
            g = modify(base, after, more, l_cap, cp.changes, cp.essential);
            after = solve_graph(g, hi);
        }
        cp.after = after.graph;
        tr.criticals.push_back(cp);
        if (++per_unit[long(std::floor(cp.eps))] > opt.events_per_unit) {
            throw IterationCapExceeded("more than " + std::to_string(opt.events_per_unit) +
                                           " critical points in one unit of eps near " + fmt(cp.eps),
                                       tr);
        }
        eps = hi;
        cur = after.graph;
        cur_res = after;
        seg = Segment{};
        seg.eps_lo = eps;
        seg.samples.push_back(cur);
    }
    seg.eps_hi = eps_target;
    tr.segments.push_back(seg);
    return tr;
}

FoliationGraph graph_at(const EvolutionTrace& tr, double eps) {
    for (const auto& s : tr.segments) {
        if (eps < s.eps_lo - 1e-15 || eps > s.eps_hi + 1e-15) continue;
        const FoliationGraph* best = &s.samples.front();
        for (const auto& g : s.samples)
            if (g.eps <= eps) best = &g;
        if (best->eps == eps) return *best;
        SolveResult r = solve_graph(*best, eps);
        if (!r.ok()) {
            std::string why;
            for (const auto& f : r.failures) why += " " + f.describe();
            throw Error(Fault::unknown_configuration, "trace graph fails at eps " + fmt(eps) + ":" + why);
        }
        return r.graph;
    }
    throw Error(Fault::out_of_range, "eps " + fmt(eps) + " is outside the trace");
}

namespace {

json params_of(const FoliationGraph& g) {
    json p = json::object();
    for (size_t i = 0; i < g.chain.size(); ++i) {
        const Node& n = g.chain[i];
        std::string id = "v" + std::to_string(i);
        switch (n.kind) {
            case NodeKind::end: break;
            case NodeKind::angle: p[id] = {{"w", n.w}}; break;
            case NodeKind::multicup: p[id] = {{"p", n.left()}, {"q", n.right()}}; break;
            default: p[id] = {{"l", n.stack.l_top}, {"a", n.stack.top().a}, {"b", n.stack.top().b}};
        }
    }
    return p;
}

json kinds_of(const FoliationGraph& g) {
    json k = json::array();
    for (const auto& n : g.chain) k.push_back(node_kind_name(n.kind));
    return k;
}

}  // namespace

json trace_to_json(const EvolutionTrace& tr) {
    json segs = json::array();
    for (const auto& s : tr.segments) {
        json samples = json::array();
        for (const auto& g : s.samples) samples.push_back({{"eps", g.eps}, {"params", params_of(g)}});
        segs.push_back({{"eps_lo", s.eps_lo},
                        {"eps_hi", s.eps_hi},
                        {"vertices", kinds_of(s.samples.front())},
                        {"samples", samples}});
    }
    json crit = json::array();
    for (const auto& c : tr.criticals) {
        json ev = json::array();
        for (const auto& e : c.events) ev.push_back({{"kind", event_kind_name(e.kind)}, {"vertex", e.index}});
        crit.push_back({{"eps", c.eps},
                        {"essential", c.essential},
                        {"events", ev},
                        {"changes", c.changes},
                        {"before", graph_to_json(c.before)},
                        {"after", graph_to_json(c.after)}});
    }
    return {{"eps_start", tr.eps_start},
            {"eps_target", tr.eps_target},
            {"segments", segs},
            {"critical_points", crit},
            {"warnings", tr.warnings},
            {"final", graph_to_json(tr.final_graph())}};
}

void write_criticals_csv(std::ostream& os, const EvolutionTrace& tr) {
    os.precision(17);
    os << "eps,essential,events,vertices,changes\n";
    for (const auto& c : tr.criticals) {
        std::string kinds, ids, ch;
        for (const auto& e : c.events) {
            if (!kinds.empty()) kinds += ';', ids += ';';
            kinds += event_kind_name(e.kind);
            ids += "v" + std::to_string(e.index);
        }
        for (const auto& s : c.changes) ch += (ch.empty() ? "" : ";") + s;
        os << c.eps << ',' << (c.essential ? 1 : 0) << ',' << kinds << ',' << ids << ",\"" << ch << "\"\n";
    }
}

}  // namespace bellman
