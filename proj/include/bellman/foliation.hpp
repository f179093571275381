#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bellman/candidates.hpp"

namespace bellman {

enum class VertexKind {
    angle,
    trolleybus_r,
    trolleybus_l,
    birdie,
    multicup,
    multitrolleybus_r,
    multitrolleybus_l,
    multibirdie,
    closed_multicup,
    long_chord,
    boundary_point,
    pasted_chord,
    infinity,
    single_tangent_r,
    single_tangent_l,
};

const char* vertex_kind_name(VertexKind k);
std::optional<VertexKind> vertex_kind_from_name(const std::string& s);

struct ClosedMulticup;

// a chordal domain cut at the chord of length l_top, possibly grown over a closed multicup
struct Stack {
    std::shared_ptr<const ChordalDomainTable> table;
    double l_top = 0;
    Chord chord;  // chord_at(l_top)
    std::shared_ptr<const ClosedMulticup> base;

    const Chord& top() const { return chord; }
    void cut(double l) {
        l_top = l;
        chord = table->chord_at(l);
    }
};

Stack make_stack(std::shared_ptr<const ChordalDomainTable> table, double l,
                 std::shared_ptr<const ClosedMulticup> base = nullptr);

struct ClosedMulticup {
    std::vector<Arc> arcs;
    std::vector<Stack> stacks;  // stacks[i] sits on the chord joining arcs i and i+1
    double beta2 = 0;
};

// vertices of the free part, ordered along the fixed boundary
enum class NodeKind { end, long_chord, multicup, angle, trolleybus_r, trolleybus_l, birdie };

struct Node {
    NodeKind kind = NodeKind::end;
    bool left_side = true;  // ends
    bool source = false;    // ends: tangents come from this infinity
    double w = 0;           // angles
    Stack stack;            // long chords, trolleybuses, birdies
    std::vector<Arc> arcs;  // multicups, rays allowed at the chain ends
    std::vector<Stack> chords;
    double beta2 = 0;
    double l_right = 0, l_left = 0;  // birdies: bases solving the right and the left gluing

    double left() const;
    double right() const;
    bool emits_right() const;
    bool emits_left() const;
    bool absorbs_right() const;
    bool absorbs_left() const;
};

const char* node_kind_name(NodeKind k);

struct FoliationGraph {
    const BoundaryFunction* bf = nullptr;
    double eps = 0;
    std::vector<Node> chain;

    // orientation of the tangent edge joining chain[i] and chain[i+1]
    Side edge_side(size_t i) const;
    double edge_lo(size_t i) const { return chain[i].right(); }
    double edge_hi(size_t i) const { return chain[i + 1].left(); }
    // force carried by the tangent edge joining chain[i] and chain[i+1]
    Force edge_force(size_t i) const;
    Force right_emission(size_t i) const;
    Force left_emission(size_t i) const;
};

Linear multicup_linear(const BoundaryFunction& bf, const std::vector<Arc>& arcs, double beta2);

nlohmann::json graph_to_json(const FoliationGraph& g);
// tables are regrown from their seeds, so bf must be the function the graph was built for
FoliationGraph graph_from_json(const nlohmann::json& j, const BoundaryFunction& bf);

struct AdmissibleReport {
    struct Entry {
        std::string item;
        std::string check;
        bool pass;
        std::string detail;
    };
    std::vector<Entry> entries;
    bool pass() const;
    std::string failures() const;
};

AdmissibleReport check_admissible(const FoliationGraph& g);

// figure indices feeding the optimizer recursion; -1 when absent
struct FigureLinks {
    int in_right = -1;  // tangent figure bringing right tangents in
    int in_left = -1;   // tangent figure bringing left tangents in
    int source = -1;    // for tangent figures: the figure at the anchored end
    int node = -1;      // chain index of the owning node, or -1 for edges
    int edge = -1;      // chain index of the left node of the owning edge
};

class BellmanCandidate {
public:
    FoliationGraph graph;
    std::vector<FigureCandidate> figures;
    std::vector<FigureLinks> links;
    double glue_residual = 0;  // largest glue mismatch found by assemble

    int locate(const Point& x) const;
    Eval eval(const Point& x) const;
    double eps() const { return graph.eps; }
    const BoundaryFunction& bf() const { return *graph.bf; }
};

BellmanCandidate assemble(const FoliationGraph& g);

void write_svg(std::ostream& os, const BellmanCandidate& bc, double x_lo, double x_hi);
void write_boundaries_csv(std::ostream& os, const BellmanCandidate& bc);

}  // namespace bellman
