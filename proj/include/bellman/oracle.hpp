#pragma once

#include <functional>
#include <ostream>
#include <vector>

#include "bellman/foliation.hpp"

namespace bellman {

// columns x1 = x_lo + i h, rows x2 = x1^2 + eps^2 j / (n2 - 1)
struct GridDomain {
    double x_lo = -1, x_hi = 1, eps = 0.5;
    int n1 = 100, n2 = 20;
    int window = 0;  // column half-width of the chord set, 0 means n1 / 4

    double h() const { return (x_hi - x_lo) / (n1 - 1); }
    double x1(int i) const { return x_lo + i * h(); }
    double x2(int i, int j) const;
    Point node(int i, int j) const { return {x1(i), x2(i, j)}; }
};

struct OracleOptions {
    int max_sweeps = 100000;
    double tol = 0;  // 0: 1e-9 (1 + max |f| on the grid)
    int jobs = 1;
    // values pinned on the columns within edge_band of either grid edge; unset leaves the edges free
    std::function<double(const Point&)> edge;
    double edge_band = -1;  // negative: 2 eps, the widest segment inside the strip
    // lower bound applied to f before the iteration, -inf for none
    double f_cap = -inf;
};

struct GridValues {
    GridDomain grid;
    std::vector<double> V;  // row-major by column: V[i * n2 + j]
    int pinned = 0;  // pinned columns on each side
    int sweeps = 0;
    double last_update = 0;
    bool monotone = true;  // every sweep was pointwise non-decreasing

    double at(int i, int j) const { return V[size_t(i) * grid.n2 + j]; }
};

GridValues grid_minimal_concave(const BoundaryFunction& bf, double eps, const GridDomain& grid,
                                const OracleOptions& opt = {});

struct OracleComparison {
    double max_abs = 0, max_rel = 0;  // rel: |V - B| / (1 + |B|)
    double max_excess = -inf;         // largest V - B
    Point where;                      // location of max_abs
    int points = 0;
};

// statistics over columns at least 2 cells away from the pinned band (or the grid edges)
OracleComparison compare(const BellmanCandidate& bc, const GridValues& V);

// columns x1, x2, V, B, diff
void write_grid_csv(std::ostream& os, const GridValues& V, const BellmanCandidate& bc);

}  // namespace bellman
