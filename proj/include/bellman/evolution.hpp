#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bellman/foliation.hpp"

namespace bellman {

enum class EventKind {
    edge_zero,
    base_zero,
    multicup_full,
    birdie_split,
    angle_lost,
    base_lost,
    table_exhausted,
    tail_short,
};

const char* event_kind_name(EventKind k);

struct Event {
    EventKind kind;
    int index;  // chain position of the node, or of the left node of an edge
    double value = 0;
    std::string describe() const;
};

struct SolveResult {
    FoliationGraph graph;
    std::vector<Event> failures;  // monitored quantities that lost their sign
    std::vector<Event> monitors;  // all monitored quantities, positive when healthy
    bool ok() const { return failures.empty(); }
};

// re-solve the free parameters of prev at eps, tracking roots from prev's values
SolveResult solve_graph(const FoliationGraph& prev, double eps);

// chordal tables are grown up to l_cap (default 2.1 eps)
FoliationGraph simple_picture(const BoundaryFunction& bf, double eps, double l_cap = 0);

struct CriticalPoint {
    double eps = 0;
    std::vector<Event> events;
    std::vector<std::string> changes;
    FoliationGraph before, after;
    bool essential = false;
};

struct Segment {
    double eps_lo = 0, eps_hi = 0;
    std::vector<FoliationGraph> samples;  // ascending in eps
};

struct EvolutionTrace {
    double eps_start = 0, eps_target = 0;
    std::vector<Segment> segments;
    std::vector<CriticalPoint> criticals;
    std::vector<std::string> warnings;

    std::vector<const CriticalPoint*> essential() const;
    const FoliationGraph& final_graph() const { return segments.back().samples.back(); }
};

struct EvolveOptions {
    double bisect_tol = 1e-11;
    int events_per_unit = 64;
    int max_steps = 200000;
};

class IterationCapExceeded : public Error {
public:
    IterationCapExceeded(const std::string& what, EvolutionTrace partial)
        : Error(Fault::iteration_cap, what), trace(std::move(partial)) {}
    EvolutionTrace trace;
};

EvolutionTrace evolve(const BoundaryFunction& bf, double eps_target, const EvolveOptions& opt = {});

// graph of the trace at eps, re-solved from the closest earlier sample
FoliationGraph graph_at(const EvolutionTrace& tr, double eps);

nlohmann::json trace_to_json(const EvolutionTrace& tr);
void write_criticals_csv(std::ostream& os, const EvolutionTrace& tr);

}  // namespace bellman
