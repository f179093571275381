#include "bellman/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace bellman {

using nlohmann::json;

const char* vertex_kind_name(VertexKind k) {
    switch (k) {
        case VertexKind::angle: return "angle";
        case VertexKind::trolleybus_r: return "trolleybus_R";
        case VertexKind::trolleybus_l: return "trolleybus_L";
        case VertexKind::birdie: return "birdie";
        case VertexKind::multicup: return "multicup";
        case VertexKind::multitrolleybus_r: return "multitrolleybus_R";
        case VertexKind::multitrolleybus_l: return "multitrolleybus_L";
        case VertexKind::multibirdie: return "multibirdie";
        case VertexKind::closed_multicup: return "closed_multicup";
        case VertexKind::long_chord: return "long_chord";
        case VertexKind::boundary_point: return "boundary_point";
        case VertexKind::pasted_chord: return "pasted_chord";
        case VertexKind::infinity: return "infinity";
        case VertexKind::single_tangent_r: return "single_tangent_R";
        case VertexKind::single_tangent_l: return "single_tangent_L";
    }
    return "vertex";
}

std::optional<VertexKind> vertex_kind_from_name(const std::string& s) {
    for (int i = 0; i <= int(VertexKind::single_tangent_l); ++i) {
        auto k = VertexKind(i);
        if (s == vertex_kind_name(k)) return k;
    }
    return std::nullopt;
}

const char* node_kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::end: return "infinity";
        case NodeKind::long_chord: return "long_chord";
        case NodeKind::multicup: return "multicup";
        case NodeKind::angle: return "angle";
        case NodeKind::trolleybus_r: return "trolleybus_R";
        case NodeKind::trolleybus_l: return "trolleybus_L";
        case NodeKind::birdie: return "birdie";
    }
    return "node";
}

Stack make_stack(std::shared_ptr<const ChordalDomainTable> table, double l, std::shared_ptr<const ClosedMulticup> base) {
    Stack s;
    s.table = std::move(table);
    s.base = std::move(base);
    s.cut(l);
    return s;
}

double Node::left() const {
    switch (kind) {
        case NodeKind::end: return left_side ? -inf : inf;
        case NodeKind::multicup: return arcs.front().lo;
        case NodeKind::angle: return w;
        default: return stack.top().a;
    }
}

double Node::right() const {
    switch (kind) {
        case NodeKind::end: return left_side ? -inf : inf;
        case NodeKind::multicup: return arcs.back().hi;
        case NodeKind::angle: return w;
        default: return stack.top().b;
    }
}

bool Node::emits_right() const {
    switch (kind) {
        case NodeKind::end: return left_side && source;
        case NodeKind::long_chord:
        case NodeKind::trolleybus_r: return true;
        case NodeKind::multicup: return std::isfinite(arcs.back().hi);
        default: return false;
    }
}

bool Node::emits_left() const {
    switch (kind) {
        case NodeKind::end: return !left_side && source;
        case NodeKind::long_chord:
        case NodeKind::trolleybus_l: return true;
        case NodeKind::multicup: return std::isfinite(arcs.front().lo);
        default: return false;
    }
}

bool Node::absorbs_right() const {
    switch (kind) {
        case NodeKind::end: return !left_side && !source;
        case NodeKind::angle:
        case NodeKind::trolleybus_r:
        case NodeKind::birdie: return true;
        default: return false;
    }
}

bool Node::absorbs_left() const {
    switch (kind) {
        case NodeKind::end: return left_side && !source;
        case NodeKind::angle:
        case NodeKind::trolleybus_l:
        case NodeKind::birdie: return true;
        default: return false;
    }
}

Side FoliationGraph::edge_side(size_t i) const {
    if (chain[i].emits_right() && chain[i + 1].absorbs_right()) return Side::right;
    if (chain[i + 1].emits_left() && chain[i].absorbs_left()) return Side::left;
    std::ostringstream os;
    os << "no tangent edge can join " << node_kind_name(chain[i].kind) << " and "
       << node_kind_name(chain[i + 1].kind) << " at position " << i;
    throw Error(Fault::input, os.str());
}

Force FoliationGraph::right_emission(size_t i) const {
    const Node& n = chain[i];
    switch (n.kind) {
        case NodeKind::end: return right_infinity_force(*bf, eps);
        case NodeKind::long_chord:
        case NodeKind::trolleybus_r: return right_chord_force(*bf, n.stack.top(), eps);
        case NodeKind::multicup: return right_multicup_force(*bf, n.arcs.back().hi, n.beta2, eps);
        default: throw Error(Fault::input, std::string(node_kind_name(n.kind)) + " emits no right tangents");
    }
}

Force FoliationGraph::left_emission(size_t i) const {
    const Node& n = chain[i];
    switch (n.kind) {
        case NodeKind::end: return left_infinity_force(*bf, eps);
        case NodeKind::long_chord:
        case NodeKind::trolleybus_l: return left_chord_force(*bf, n.stack.top(), eps);
        case NodeKind::multicup: return left_multicup_force(*bf, n.arcs.front().lo, n.beta2, eps);
        default: throw Error(Fault::input, std::string(node_kind_name(n.kind)) + " emits no left tangents");
    }
}

Force FoliationGraph::edge_force(size_t i) const {
    return edge_side(i) == Side::right ? right_emission(i) : left_emission(i + 1);
}

Linear multicup_linear(const BoundaryFunction& bf, const std::vector<Arc>& arcs, double beta2) {
    double w = std::isfinite(arcs.front().hi) ? arcs.front().hi : arcs.back().lo;
    auto d = bf.eval(w);
    return {d.f - w * d.f1 + beta2 * w * w, d.f1 - 2 * beta2 * w, beta2};
}

// ---------------------------------------------------------------- JSON

namespace {

json num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double get_num(const json& j) {
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return inf;
        if (s == "-inf") return -inf;
        throw Error(Fault::input, "bad number '" + s + "'");
    }
    return j.get<double>();
}

json arcs_json(const std::vector<Arc>& arcs) {
    json a = json::array();
    for (const auto& r : arcs) a.push_back(json::array({num(r.lo), num(r.hi)}));
    return a;
}

std::vector<Arc> arcs_from(const json& j) {
    std::vector<Arc> arcs;
    for (const auto& r : j) arcs.push_back({get_num(r.at(0)), get_num(r.at(1))});
    return arcs;
}

json stack_json(const Stack& s);

json closed_json(const ClosedMulticup& m) {
    json st = json::array();
    for (const auto& s : m.stacks) st.push_back(stack_json(s));
    return {{"arcs", arcs_json(m.arcs)}, {"stacks", st}, {"beta2", m.beta2}};
}

json stack_json(const Stack& s) {
    json seed;
    const auto& t = *s.table;
    if (t.kind == TableKind::cup_from_point) {
        seed = {{"kind", "point"}, {"c", t.origin}};
    } else {
        seed = {{"kind", t.kind == TableKind::over_chord ? "chord" : "hull"},
                {"a", t.seed.a},
                {"b", t.seed.b}};
        if (s.base) seed["multicup"] = closed_json(*s.base);
    }
    return {{"seed", seed}, {"table_l_max", t.l_max}, {"l", s.l_top}, {"a", s.top().a}, {"b", s.top().b},
            {"dl", s.top().dl}, {"dr", s.top().dr}};
}

Stack stack_from(const json& j, const BoundaryFunction& bf);

ClosedMulticup closed_from(const json& j, const BoundaryFunction& bf) {
    ClosedMulticup m;
    m.arcs = arcs_from(j.at("arcs"));
    for (const auto& s : j.at("stacks")) m.stacks.push_back(stack_from(s, bf));
    m.beta2 = j.at("beta2").get<double>();
    return m;
}

Stack stack_from(const json& j, const BoundaryFunction& bf) {
    const json& seed = j.at("seed");
    std::string kind = seed.at("kind").get<std::string>();
    double l_max = j.at("table_l_max").get<double>();
    GrowSeed gs;
    std::shared_ptr<const ClosedMulticup> base;
    if (kind == "point") {
        gs = GrowSeed::at_point(seed.at("c").get<double>());
    } else if (kind == "chord" || kind == "hull") {
        double a = seed.at("a").get<double>(), b = seed.at("b").get<double>();
        gs = GrowSeed::over(make_chord(bf, a, b),
                            kind == "chord" ? TableKind::over_chord : TableKind::over_multicup_hull);
        if (seed.contains("multicup")) base = std::make_shared<ClosedMulticup>(closed_from(seed.at("multicup"), bf));
    } else {
        throw Error(Fault::input, "unknown stack seed kind '" + kind + "'");
    }
    auto table = grow_chordal_domain(bf, gs, l_max);
    return make_stack(table, j.at("l").get<double>(), base);
}

void add_fixed(json& vertices, json& edges, const Stack& s, const std::string& owner, int& counter) {
    std::string id = "f" + std::to_string(counter++);
    const auto& t = *s.table;
    json v;
    if (t.kind == TableKind::cup_from_point) {
        v = {{"id", id}, {"kind", vertex_kind_name(VertexKind::boundary_point)}, {"free", false},
             {"params", {{"c", t.origin}}}};
    } else if (s.base) {
        v = {{"id", id}, {"kind", vertex_kind_name(VertexKind::closed_multicup)}, {"free", false},
             {"params", {{"arcs", arcs_json(s.base->arcs)}, {"beta2", s.base->beta2}}}};
    } else {
        v = {{"id", id}, {"kind", vertex_kind_name(VertexKind::pasted_chord)}, {"free", false},
             {"params", {{"a", t.seed.a}, {"b", t.seed.b}}}};
    }
    vertices.push_back(v);
    edges.push_back({{"id", "e" + std::to_string(edges.size())},
                     {"kind", "chordal"},
                     {"from", id},
                     {"to", owner},
                     {"params", {{"l_lo", t.l_min}, {"l_hi", s.l_top}, {"a", s.top().a}, {"b", s.top().b}}}});
    if (s.base)
        for (const auto& sub : s.base->stacks) add_fixed(vertices, edges, sub, id, counter);
}

}  // namespace

json graph_to_json(const FoliationGraph& g) {
    json vertices = json::array(), edges = json::array();
    for (size_t i = 0; i < g.chain.size(); ++i) {
        const Node& n = g.chain[i];
        json params;
        switch (n.kind) {
            case NodeKind::end:
                params = {{"side", n.left_side ? "left" : "right"}, {"source", n.source},
                          {"at", num(n.left_side ? -inf : inf)}};
                break;
            case NodeKind::angle: params = {{"w", n.w}}; break;
            case NodeKind::multicup: {
                json st = json::array();
                for (const auto& s : n.chords) st.push_back(stack_json(s));
                params = {{"arcs", arcs_json(n.arcs)}, {"chords", st}, {"beta2", n.beta2}};
                break;
            }
            default: params = {{"stack", stack_json(n.stack)}, {"a0", n.stack.top().a}, {"b0", n.stack.top().b}};
        }
        vertices.push_back({{"id", "v" + std::to_string(i)}, {"kind", node_kind_name(n.kind)}, {"free", true},
                            {"params", params}});
    }
    for (size_t i = 0; i + 1 < g.chain.size(); ++i) {
        Side s = g.edge_side(i);
        json e = {{"id", "e" + std::to_string(edges.size())},
                  {"kind", s == Side::right ? "tangent_R" : "tangent_L"},
                  {"params", {{"u1", num(g.edge_lo(i))}, {"u2", num(g.edge_hi(i))}}}};
        e["from"] = "v" + std::to_string(s == Side::right ? i : i + 1);
        e["to"] = "v" + std::to_string(s == Side::right ? i + 1 : i);
        edges.push_back(e);
    }
    int counter = 0;
    for (size_t i = 0; i < g.chain.size(); ++i) {
        const Node& n = g.chain[i];
        std::string owner = "v" + std::to_string(i);
        if (n.kind == NodeKind::multicup) {
            for (const auto& s : n.chords) add_fixed(vertices, edges, s, owner, counter);
        } else if (n.kind != NodeKind::end && n.kind != NodeKind::angle) {
            add_fixed(vertices, edges, n.stack, owner, counter);
        }
    }
    return {{"eps", g.eps}, {"vertices", vertices}, {"edges", edges}};
}

FoliationGraph graph_from_json(const json& j, const BoundaryFunction& bf) {
    FoliationGraph g;
    g.bf = &bf;
    try {
        g.eps = j.at("eps").get<double>();
        for (const auto& v : j.at("vertices")) {
            if (!v.value("free", false)) continue;
            std::string kind = v.at("kind").get<std::string>();
            const json& p = v.at("params");
            Node n;
            if (kind == "infinity") {
                n.kind = NodeKind::end;
                n.left_side = p.at("side").get<std::string>() == "left";
                n.source = p.at("source").get<bool>();
            } else if (kind == "angle") {
                n.kind = NodeKind::angle;
                n.w = p.at("w").get<double>();
            } else if (kind == "multicup") {
                n.kind = NodeKind::multicup;
                n.arcs = arcs_from(p.at("arcs"));
                for (const auto& s : p.at("chords")) n.chords.push_back(stack_from(s, bf));
                n.beta2 = p.at("beta2").get<double>();
            } else {
                if (kind == "long_chord")
                    n.kind = NodeKind::long_chord;
                else if (kind == "trolleybus_R")
                    n.kind = NodeKind::trolleybus_r;
                else if (kind == "trolleybus_L")
                    n.kind = NodeKind::trolleybus_l;
                else if (kind == "birdie")
                    n.kind = NodeKind::birdie;
                else
                    throw Error(Fault::input, "unsupported free vertex kind '" + kind + "'");
                n.stack = stack_from(p.at("stack"), bf);
            }
            g.chain.push_back(std::move(n));
        }
    } catch (const json::exception& e) {
        throw Error(Fault::input, std::string("malformed graph: ") + e.what());
    }
    if (g.chain.size() < 2) throw Error(Fault::input, "graph needs at least two free vertices");
    for (size_t i = 0; i + 1 < g.chain.size(); ++i) g.edge_side(i);
    // stored tangent edges must agree with the ends implied by their vertices
    try {
        for (const auto& e : j.value("edges", json::array())) {
            std::string kind = e.at("kind").get<std::string>();
            if (kind != "tangent_R" && kind != "tangent_L") continue;
            size_t k = std::stoul(e.at("from").get<std::string>().substr(1));
            size_t m = std::stoul(e.at("to").get<std::string>().substr(1));
            size_t i = std::min(k, m);
            if (i + 1 >= g.chain.size() || std::max(k, m) != i + 1)
                throw Error(Fault::glue_failure, "edge " + e.value("id", std::string("?")) + " joins non-adjacent vertices");
            const json& p = e.at("params");
            auto same = [](double x, double y) { return x == y || std::abs(x - y) <= 1e-9 * (1 + std::abs(x)); };
            if (!same(get_num(p.at("u1")), g.edge_lo(i)) || !same(get_num(p.at("u2")), g.edge_hi(i)))
                throw Error(Fault::glue_failure, "edge " + e.value("id", std::string("?")) + " disagrees with its vertices");
        }
    } catch (const json::exception& e) {
        throw Error(Fault::input, std::string("malformed graph edge: ") + e.what());
    } catch (const std::logic_error& e) {
        throw Error(Fault::input, std::string("malformed vertex id: ") + e.what());
    }
    return g;
}

// ---------------------------------------------------------------- admissibility

bool AdmissibleReport::pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const Entry& e) { return e.pass; });
}

std::string AdmissibleReport::failures() const {
    std::ostringstream os;
    for (const auto& e : entries)
        if (!e.pass) os << e.item << ": " << e.check << " (" << e.detail << ")\n";
    return os.str();
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

AdmissibleReport check_admissible(const FoliationGraph& g) {
    AdmissibleReport rep;
    const BoundaryFunction& bf = *g.bf;
    const double eps = g.eps;
    const double ltol = 1e-9 * (1 + eps);
    auto add = [&](const std::string& item, const std::string& check, bool pass, const std::string& detail) {
        rep.entries.push_back({item, check, pass, detail});
    };
    auto name = [&](size_t i) { return std::string(node_kind_name(g.chain[i].kind)) + " v" + std::to_string(i); };

    std::vector<std::optional<Side>> sides(g.chain.size());
    for (size_t i = 0; i + 1 < g.chain.size(); ++i) {
        try {
            sides[i] = g.edge_side(i);
            add("edge " + std::to_string(i), "orientation", true, "");
        } catch (const Error& e) {
            add("edge " + std::to_string(i), "orientation", false, e.what());
        }
    }
    if (!g.chain.empty()) {
        add("chain", "left end", g.chain.front().left() == -inf, fmt(g.chain.front().left()));
        add("chain", "right end", g.chain.back().right() == inf, fmt(g.chain.back().right()));
    }

    auto check_stack_sign = [&](const std::string& item, const Stack& s) {
        const Chord& c = s.top();
        double tol = 1e-10 * (1 + std::abs(c.dl) + std::abs(c.dr));
        add(item, "differentials non-positive", c.dl <= tol && c.dr <= tol,
            "D_L=" + fmt(c.dl) + " D_R=" + fmt(c.dr));
        add(item, "chord inside table", s.l_top <= s.table->l_max + ltol, fmt(s.l_top));
        if (s.table->kind == TableKind::cup_from_point) {
            bool ok = false;
            for (const auto& r : bf.roots().c)
                if (s.table->origin >= r.lo - 1e-9 && s.table->origin <= r.hi + 1e-9) ok = true;
            add(item, "leaf-root condition", ok, "origin " + fmt(s.table->origin));
        }
    };

    for (size_t i = 0; i < g.chain.size(); ++i) {
        const Node& n = g.chain[i];
        std::string item = name(i);
        switch (n.kind) {
            case NodeKind::end: break;
            case NodeKind::long_chord:
                add(item, "full chord", std::abs(n.stack.l_top - 2 * eps) <= ltol, fmt(n.stack.l_top));
                check_stack_sign(item, n.stack);
                break;
            case NodeKind::trolleybus_r:
            case NodeKind::trolleybus_l:
            case NodeKind::birdie: {
                add(item, "base length in (0, 2eps]", n.stack.l_top > 0 && n.stack.l_top <= 2 * eps + ltol,
                    fmt(n.stack.l_top));
                check_stack_sign(item, n.stack);
                const Chord& c = n.stack.top();
                double tol = 1e-7 * (1 + std::abs(c.dl) + std::abs(c.dr));
                if (n.kind != NodeKind::trolleybus_l && i > 0 && sides[i - 1] == Side::right) {
                    double r = g.right_emission(i - 1).eval(c.a) - c.dl;
                    add(item, "right gluing at a0", std::abs(r) <= tol, fmt(r));
                }
                if (n.kind != NodeKind::trolleybus_r && i + 1 < g.chain.size() && sides[i] == Side::left) {
                    double r = g.left_emission(i + 1).eval(c.b) + c.dr;
                    add(item, "left gluing at b0", std::abs(r) <= tol, fmt(r));
                }
                break;
            }
            case NodeKind::multicup: {
                bool sorted = true;
                for (size_t k = 0; k < n.arcs.size(); ++k) {
                    if (n.arcs[k].hi < n.arcs[k].lo) sorted = false;
                    if (k > 0 && n.arcs[k].lo <= n.arcs[k - 1].hi) sorted = false;
                }
                add(item, "arcs disjoint and ordered", sorted, std::to_string(n.arcs.size()) + " arcs");
                add(item, "one chord per gap", n.chords.size() + 1 == n.arcs.size(),
                    std::to_string(n.chords.size()));
                for (size_t k = 0; k < n.chords.size() && k + 1 < n.arcs.size(); ++k) {
                    const Chord& c = n.chords[k].top();
                    bool fits = std::abs(c.a - n.arcs[k].hi) <= 1e-8 && std::abs(c.b - n.arcs[k + 1].lo) <= 1e-8;
                    add(item, "chord joins arcs", fits, fmt(c.a) + ".." + fmt(c.b));
                    add(item, "gap at most 2eps", c.length() <= 2 * eps + ltol, fmt(c.length()));
                    double b2 = chord_coefficients(bf, c.a, c.b).b2;
                    add(item, "common linear part", std::abs(b2 - n.beta2) <= 1e-7 * (1 + std::abs(b2)), fmt(b2));
                }
                for (const auto& a : n.arcs) {
                    if (a.lo == a.hi) continue;
                    double t = std::isfinite(a.lo) ? a.lo : a.hi;
                    double b2 = 0.5 * bf.d(2, t);
                    add(item, "arc on the linear part", std::abs(b2 - n.beta2) <= 1e-7 * (1 + std::abs(b2)),
                        fmt(b2));
                }
                double span = n.right() - n.left();
                if (std::isfinite(span)) add(item, "open multicup", span >= 2 * eps - ltol, fmt(span));
                break;
            }
            case NodeKind::angle: {
                if (i == 0 || i + 1 >= g.chain.size() || sides[i - 1] != Side::right || sides[i] != Side::left) {
                    add(item, "angle between right and left tangents", false, "");
                    break;
                }
                Force FR = g.right_emission(i - 1), FL = g.left_emission(i + 1);
                double a = FR.eval(n.w), b = FL.eval(n.w);
                add(item, "balance equation", std::abs(a + b) <= 1e-7 * (1 + std::abs(a) + std::abs(b)),
                    fmt(a + b));
                break;
            }
        }
    }

    for (size_t i = 0; i + 1 < g.chain.size(); ++i) {
        if (!sides[i]) continue;
        std::string item = "edge " + std::to_string(i);
        double lo = g.edge_lo(i), hi = g.edge_hi(i);
        add(item, "non-negative length", hi - lo >= -ltol, fmt(hi - lo));
        if (bf.is_quadratic()) continue;
        Force F = g.edge_force(i);
        Tail t = tail_endpoint(F);
        if (*sides[i] == Side::right)
            add(item, "inside the force tail", t.endpoint >= hi - ltol, "tail ends at " + fmt(t.endpoint));
        else
            add(item, "inside the force tail", t.endpoint <= lo + ltol, "tail ends at " + fmt(t.endpoint));
    }
    return rep;
}

// ---------------------------------------------------------------- assembly

int BellmanCandidate::locate(const Point& x) const {
    double eps = graph.eps;
    double lo = x.x1 * x.x1, hi = lo + eps * eps;
    double s = 1e-12 * (1 + std::abs(x.x2));
    if (!(x.x2 >= lo - s && x.x2 <= hi + s)) {
        std::ostringstream os;
        os.precision(17);
        os << "point (" << x.x1 << ", " << x.x2 << ") is outside the strip";
        throw Error(Fault::outside_strip, os.str());
    }
    for (double tol : {1e-12, 1e-9, 1e-7})
        for (size_t i = 0; i < figures.size(); ++i)
            if (figures[i].contains(x, tol)) return int(i);
    std::ostringstream os;
    os.precision(17);
    os << "no figure contains (" << x.x1 << ", " << x.x2 << ")";
    throw Error(Fault::outside_figure, os.str());
}

Eval BellmanCandidate::eval(const Point& x) const { return figures[locate(x)].eval(x); }

BellmanCandidate assemble(const FoliationGraph& g) {
    BellmanCandidate bc;
    bc.graph = g;
    const BoundaryFunction& bf = *g.bf;
    const double eps = g.eps;
    const size_t n = g.chain.size();
    std::vector<int> node_fig(n, -1), edge_fig(n, -1);

    auto add = [&](FigureCandidate fc, FigureLinks lk) {
        bc.figures.push_back(std::move(fc));
        bc.links.push_back(lk);
        return int(bc.figures.size()) - 1;
    };

    std::function<int(const Stack&, int)> add_stack = [&](const Stack& s, int node) {
        int base = -1;
        if (s.base) {
            for (const auto& sub : s.base->stacks) add_stack(sub, node);
            FigureCandidate fc;
            fc.kind = FigureKind::closed_multicup;
            fc.eps = eps;
            fc.bf = &bf;
            fc.chord = s.table->seed;
            fc.arcs = s.base->arcs;
            for (const auto& sub : s.base->stacks) fc.chords.push_back(sub.top());
            fc.lin = multicup_linear(bf, fc.arcs, s.base->beta2);
            FigureLinks lk;
            lk.node = node;
            base = add(fc, lk);
        }
        if (s.l_top <= s.table->l_min) return base;
        FigureLinks lk;
        lk.node = node;
        return add(chordal_figure(bf, s.table, s.table->l_min, s.l_top, eps), lk);
    };

    for (size_t i = 0; i < n; ++i) {
        const Node& nd = g.chain[i];
        FigureLinks lk;
        lk.node = int(i);
        switch (nd.kind) {
            case NodeKind::long_chord: node_fig[i] = add_stack(nd.stack, int(i)); break;
            case NodeKind::trolleybus_r:
            case NodeKind::trolleybus_l:
            case NodeKind::birdie: add_stack(nd.stack, int(i)); break;
            case NodeKind::multicup: {
                FigureCandidate fc;
                fc.kind = FigureKind::multicup;
                fc.eps = eps;
                fc.bf = &bf;
                fc.arcs = nd.arcs;
                for (const auto& s : nd.chords) {
                    add_stack(s, int(i));
                    fc.chords.push_back(s.top());
                }
                fc.lin = multicup_linear(bf, nd.arcs, nd.beta2);
                node_fig[i] = add(fc, lk);
                break;
            }
            default: break;
        }
    }

    std::vector<Side> sides(n, Side::right);
    for (size_t i = 0; i + 1 < n; ++i) {
        sides[i] = g.edge_side(i);
        Force F = sides[i] == Side::right ? g.right_emission(i) : g.left_emission(i + 1);
        FigureLinks lk;
        lk.edge = int(i);
        edge_fig[i] = add(tangent_figure(bf, SlopeFunction::from_force(F), g.edge_lo(i), g.edge_hi(i)), lk);
    }

    for (size_t i = 0; i < n; ++i) {
        const Node& nd = g.chain[i];
        FigureCandidate fc;
        fc.eps = eps;
        fc.bf = &bf;
        FigureLinks lk;
        lk.node = int(i);
        switch (nd.kind) {
            case NodeKind::angle: {
                if (i == 0 || i + 1 >= n || sides[i - 1] != Side::right || sides[i] != Side::left)
                    throw Error(Fault::input, "angle without a right and a left tangent family");
                double mR = bc.figures[edge_fig[i - 1]].slope.eval(nd.w).m;
                double mL = bc.figures[edge_fig[i]].slope.eval(nd.w).m;
                fc.kind = FigureKind::angle;
                fc.w = nd.w;
                fc.lin = angle_coefficients(bf, nd.w, mR, mL, eps);
                lk.in_right = edge_fig[i - 1];
                lk.in_left = edge_fig[i];
                break;
            }
            case NodeKind::trolleybus_r:
            case NodeKind::trolleybus_l:
            case NodeKind::birdie: {
                fc.kind = nd.kind == NodeKind::trolleybus_r   ? FigureKind::trolleybus_r
                          : nd.kind == NodeKind::trolleybus_l ? FigureKind::trolleybus_l
                                                              : FigureKind::birdie;
                fc.chord = nd.stack.top();
                fc.lin = chord_coefficients(bf, fc.chord.a, fc.chord.b);
                if (nd.kind != NodeKind::trolleybus_l) {
                    if (i == 0 || sides[i - 1] != Side::right) throw Error(Fault::input, "trolleybus without right tangents");
                    lk.in_right = edge_fig[i - 1];
                }
                if (nd.kind != NodeKind::trolleybus_r) {
                    if (i + 1 >= n || sides[i] != Side::left) throw Error(Fault::input, "trolleybus without left tangents");
                    lk.in_left = edge_fig[i];
                }
                break;
            }
            default: continue;
        }
        node_fig[i] = add(fc, lk);
    }

    for (size_t i = 0; i + 1 < n; ++i) {
        size_t src = sides[i] == Side::right ? i : i + 1;
        bc.links[edge_fig[i]].source = node_fig[src];
    }

    auto glue = [&](int fa, int fb, const Interface& itf, const std::string& where) {
        if (fa < 0 || fb < 0) return;
        GlueResidual r = glue_check(bc.figures[fa], bc.figures[fb], itf);
        double scale = 1 + std::abs(bf.d(0, itf.p.x1)) + std::abs(bf.d(1, itf.p.x1));
        double worst = std::max(r.value, r.grad_x2) / scale;
        bc.glue_residual = std::max(bc.glue_residual, worst);
        if (worst > 1e-8) {
            std::ostringstream os;
            os.precision(17);
            os << "glue failure at " << where << ": value jump " << r.value << ", gradient jump " << r.grad_x2;
            throw Error(Fault::glue_failure, os.str());
        }
    };
    for (size_t i = 0; i + 1 < n; ++i) {
        Side s = sides[i];
        double lo = g.edge_lo(i), hi = g.edge_hi(i);
        size_t src = s == Side::right ? i : i + 1, dst = s == Side::right ? i + 1 : i;
        double us = s == Side::right ? lo : hi, ud = s == Side::right ? hi : lo;
        if (std::isfinite(us))
            glue(edge_fig[i], node_fig[src], tangent_interface(us, s, eps), "tangent edge " + std::to_string(i) + " source");
        if (std::isfinite(ud))
            glue(edge_fig[i], node_fig[dst], tangent_interface(ud, s, eps), "tangent edge " + std::to_string(i) + " end");
    }
    return bc;
}

// ---------------------------------------------------------------- export

namespace {

struct Canvas {
    double x_lo, x_hi, y_hi;
    double w = 960, h = 420;
    double px(double x1) const { return 20 + (x1 - x_lo) / (x_hi - x_lo) * (w - 40); }
    double py(const Point& x) const { return h - 20 - (x.x2 - x.x1 * x.x1) / y_hi * (h - 40); }
};

void polyline(std::ostream& os, const Canvas& cv, const Point& p, const Point& q, const char* color, int n = 64) {
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"0.8\" points=\"";
    for (int i = 0; i < n; ++i) {
        double s = double(i) / (n - 1);
        Point x{p.x1 + s * (q.x1 - p.x1), p.x2 + s * (q.x2 - p.x2)};
        os << cv.px(x.x1) << ',' << cv.py(x) << ' ';
    }
    os << "\"/>\n";
}

void region(std::ostream& os, const Canvas& cv, const std::vector<Point>& pts, const char* color) {
    os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.35\" stroke=\"none\" points=\"";
    for (const auto& x : pts) os << cv.px(x.x1) << ',' << cv.py(x) << ' ';
    os << "\"/>\n";
}

// straight segment from p to q sampled in flattened coordinates
std::vector<Point> segment_pts(const Point& p, const Point& q, int n = 64) {
    std::vector<Point> v;
    for (int i = 0; i < n; ++i) {
        double s = double(i) / (n - 1);
        v.push_back({p.x1 + s * (q.x1 - p.x1), p.x2 + s * (q.x2 - p.x2)});
    }
    return v;
}

std::vector<Point> upper_pts(double lo, double hi, double eps, int n = 64) {
    std::vector<Point> v;
    for (int i = 0; i < n; ++i) v.push_back(upper_point(lo + (hi - lo) * i / (n - 1), eps));
    return v;
}

}  // namespace

void write_svg(std::ostream& os, const BellmanCandidate& bc, double x_lo, double x_hi) {
    const double eps = bc.eps();
    Canvas cv{x_lo, x_hi, eps * eps * 1.05};
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cv.w << "\" height=\"" << cv.h << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    auto clip = [&](double u) { return std::clamp(u, x_lo - 2 * eps, x_hi + 2 * eps); };
    for (const auto& f : bc.figures) {
        switch (f.kind) {
            case FigureKind::tangent_r:
            case FigureKind::tangent_l: {
                double lo = clip(f.u1), hi = clip(f.u2);
                bool right = f.kind == FigureKind::tangent_r;
                const char* color = right ? "#1f77b4" : "#d62728";
                int k = 24;
                for (int i = 0; i <= k; ++i) {
                    double u = lo + (hi - lo) * i / k;
                    Interface itf = tangent_interface(u, right ? Side::right : Side::left, eps);
                    polyline(os, cv, itf.p, itf.q, color);
                }
                break;
            }
            case FigureKind::chordal: {
                int k = 16;
                for (int i = 0; i <= k; ++i) {
                    Chord c = f.table->chord_at(f.l_lo + (f.l_hi - f.l_lo) * i / k);
                    polyline(os, cv, lower_point(c.a), lower_point(c.b), "#2ca02c");
                }
                break;
            }
            case FigureKind::angle: {
                std::vector<Point> pts = upper_pts(f.w - eps, f.w + eps, eps);
                pts.push_back(lower_point(f.w));
                region(os, cv, pts, "#ff7f0e");
                break;
            }
            case FigureKind::trolleybus_r:
            case FigureKind::trolleybus_l:
            case FigureKind::birdie: {
                double lo = f.kind == FigureKind::trolleybus_l ? f.chord.a + eps : f.chord.a - eps;
                double hi = f.kind == FigureKind::trolleybus_r ? f.chord.b - eps : f.chord.b + eps;
                std::vector<Point> pts = upper_pts(lo, hi, eps);
                for (auto& p : segment_pts(lower_point(f.chord.b), lower_point(f.chord.a))) pts.push_back(p);
                region(os, cv, pts, "#9467bd");
                break;
            }
            case FigureKind::multicup:
            case FigureKind::closed_multicup: {
                double p = std::max(f.kind == FigureKind::multicup ? f.arcs.front().lo : f.chord.a, x_lo - 2 * eps);
                double q = std::min(f.kind == FigureKind::multicup ? f.arcs.back().hi : f.chord.b, x_hi + 2 * eps);
                std::vector<Point> pts;
                if (f.kind == FigureKind::multicup) {
                    pts = upper_pts(p + eps, q - eps, eps);
                    if (q - p < 2 * eps) pts.clear();
                } else {
                    pts = segment_pts(lower_point(p), lower_point(q));
                }
                for (double t = q; t >= p; t -= (q - p) / 63 + 1e-12) pts.push_back(lower_point(t));
                region(os, cv, pts, "#8c564b");
                break;
            }
        }
    }
    polyline(os, cv, lower_point(x_lo), lower_point(x_hi), "black", 2);
    os << "<polyline fill=\"none\" stroke=\"black\" points=\"";
    for (const auto& x : upper_pts(x_lo, x_hi, eps)) os << cv.px(x.x1) << ',' << cv.py(x) << ' ';
    os << "\"/>\n</svg>\n";
}

void write_boundaries_csv(std::ostream& os, const BellmanCandidate& bc) {
    os.precision(17);
    os << "figure,kind,p1,p2,p3,p4\n";
    for (size_t i = 0; i < bc.figures.size(); ++i) {
        const auto& f = bc.figures[i];
        os << i << ',' << figure_kind_name(f.kind) << ',';
        switch (f.kind) {
            case FigureKind::tangent_r:
            case FigureKind::tangent_l: os << f.u1 << ',' << f.u2 << ",,"; break;
            case FigureKind::chordal:
                os << f.bottom.a << ',' << f.bottom.b << ',' << f.top.a << ',' << f.top.b;
                break;
            case FigureKind::angle: os << f.w << ",,,"; break;
            case FigureKind::multicup: os << f.arcs.front().lo << ',' << f.arcs.back().hi << ",,"; break;
            default: os << f.chord.a << ',' << f.chord.b << ",,"; break;
        }
        os << '\n';
    }
}

}  // namespace bellman
