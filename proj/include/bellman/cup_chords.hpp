#pragma once

#include <memory>
#include <ostream>
#include <vector>

#include "bellman/boundary_function.hpp"

namespace bellman {

struct Chord {
    double a = 0, b = 0;
    double dl = 0, dr = 0;
    double length() const { return b - a; }
};

double cup_residual(const BoundaryFunction& bf, double a, double b);
// (D_L, D_R); tends to (0, 0) as b - a -> 0
std::pair<double, double> differentials(const BoundaryFunction& bf, double a, double b);
Chord make_chord(const BoundaryFunction& bf, double a, double b);

enum class TableKind { cup_from_point, over_chord, over_multicup_hull };
enum class TableStop { reached_l_max, differential_zero, degenerate };

struct TableSample {
    double l, a, b, dl, dr;
};

class ChordalDomainTable {
public:
    TableKind kind = TableKind::cup_from_point;
    double origin = 0;  // point root for cups
    Chord seed;         // bottom chord for the other kinds
    std::vector<TableSample> samples;
    double l_min = 0, l_max = 0;
    TableStop stop = TableStop::reached_l_max;

    const BoundaryFunction* bf = nullptr;

    Chord chord_at(double l) const;
    // chord length whose right (left) end equals u; u inside [b(l_min), b(l_max)]
    double l_for_right_end(double u) const;
    double l_for_left_end(double u) const;
    void write_csv(std::ostream& os) const;
};

struct GrowSeed {
    bool point = true;
    double c = 0;  // point root
    Chord chord;   // bottom chord for growth over a chord or multicup hull
    TableKind kind = TableKind::cup_from_point;

    static GrowSeed at_point(double c) { return {true, c, {}, TableKind::cup_from_point}; }
    static GrowSeed over(const Chord& ch, TableKind k = TableKind::over_chord) { return {false, 0, ch, k}; }
};

std::shared_ptr<const ChordalDomainTable> grow_chordal_domain(const BoundaryFunction& bf, const GrowSeed& seed,
                                                              double l_max);

inline Chord chord_at(const ChordalDomainTable& t, double l) { return t.chord_at(l); }

}  // namespace bellman
