#include "bellman/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace bellman {

double GridDomain::x2(int i, int j) const {
    double t = x1(i);
    return t * t + eps * eps * j / (n2 - 1);
}

namespace {

// the segment [y, z] stays below the upper parabola
bool under_upper(const Point& y, const Point& z, double eps) {
    double dt = z.x1 - y.x1;
    if (dt == 0) return true;
    double k = (z.x2 - y.x2) / dt;
    double t = 0.5 * k;
    if (t <= std::min(y.x1, z.x1) || t >= std::max(y.x1, z.x1)) return true;
    double line = y.x2 + k * (t - y.x1);
    return t * t + eps * eps - line >= -1e-14 * (1 + std::abs(line));
}

class Sweeper {
public:
    explicit Sweeper(const GridDomain& g) : g_(g) {}

    // value at column i and height x2 by linear interpolation between rows; NaN outside the strip
    double interp(const std::vector<double>& V, int i, double x2) const {
        double t = g_.x1(i);
        double r = (x2 - t * t) / (g_.eps * g_.eps) * (g_.n2 - 1);
        if (r < -1e-9 || r > g_.n2 - 1 + 1e-9) return std::nan("");
        r = std::clamp(r, 0.0, double(g_.n2 - 1));
        int j = std::min(int(r), g_.n2 - 2);
        double s = r - j;
        double lo = V[size_t(i) * g_.n2 + j], hi = V[size_t(i) * g_.n2 + j + 1];
        if (s <= 0) return lo;
        if (s >= 1) return hi;
        return (1 - s) * lo + s * hi;
    }

    // best midpoint combination for the node (i, j)
    double best(const std::vector<double>& V, int i, int j, int W) const {
        const Point x = g_.node(i, j);
        double v = V[size_t(i) * g_.n2 + j];
        for (int d = 1; d <= W; ++d) {
            int il = i - d, ir = i + d;
            if (il < 0 || ir >= g_.n1) break;
            // the two tangents from x to the upper parabola, both ends interpolated
            double r = std::sqrt(std::max(0.0, x.x1 * x.x1 + g_.eps * g_.eps - x.x2));
            for (double k : {2 * (x.x1 - r), 2 * (x.x1 + r)}) {
                double dx = d * g_.h();
                Point y{x.x1 - dx, x.x2 - k * dx}, z{x.x1 + dx, x.x2 + k * dx};
                double vy = interp(V, il, y.x2), vz = interp(V, ir, z.x2);
                if (std::isnan(vy) || std::isnan(vz)) continue;
                double c = 0.5 * (vy + vz);
                if (c > v) v = c;
            }
            for (int side = 0; side < 2; ++side) {
                int ia = side == 0 ? il : ir, ib = side == 0 ? ir : il;
                for (int jj = 0; jj < g_.n2; ++jj) {
                    Point y = g_.node(ia, jj);
                    Point z{2 * x.x1 - y.x1, 2 * x.x2 - y.x2};
                    double vz = interp(V, ib, z.x2);
                    if (std::isnan(vz)) continue;
                    if (!under_upper(y, z, g_.eps)) continue;
                    double c = 0.5 * (V[size_t(ia) * g_.n2 + jj] + vz);
                    if (c > v) v = c;
                }
            }
        }
        return v;
    }

private:
    const GridDomain& g_;
};

}  // namespace

GridValues grid_minimal_concave(const BoundaryFunction& bf, double eps, const GridDomain& grid,
                                const OracleOptions& opt) {
    if (std::abs(grid.eps - eps) > 1e-15 * eps) throw Error(Fault::input, "grid built for a different eps");
    if (grid.n1 < 5 || grid.n2 < 2 || !(grid.x_hi > grid.x_lo)) throw Error(Fault::input, "degenerate grid");
    GridValues out;
    out.grid = grid;
    const int n1 = grid.n1, n2 = grid.n2;
    const double h = grid.h();
    int W = grid.window > 0 ? grid.window : std::max(1, n1 / 4);
    // no segment inside the strip is wider than 2 eps
    W = std::min(W, int(std::floor(eps / h * (1 + 1e-12))));

    auto f = [&](double t) { return std::max(bf.d(0, t), opt.f_cap); };
    double fmax = 0;
    for (int i = 0; i < n1; ++i) fmax = std::max(fmax, std::abs(f(grid.x1(i))));
    const double tol = opt.tol > 0 ? opt.tol : 1e-9 * (1 + fmax);

    // start: f on the bottom row, two-point chords symmetric about x1 elsewhere
    std::vector<double> V(size_t(n1) * n2);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            Point x = grid.node(i, j);
            double s = std::sqrt(std::max(0.0, x.x2 - x.x1 * x.x1));
            V[size_t(i) * n2 + j] = j == 0 ? f(x.x1) : 0.5 * (f(x.x1 - s) + f(x.x1 + s));
        }
    if (opt.edge) {
        double band = opt.edge_band >= 0 ? opt.edge_band : 2 * eps;
        out.pinned = std::clamp(int(std::ceil(band / h - 1e-9)) + 1, 1, (n1 - 1) / 2);
    }
    auto pinned = [&](int i) { return i < out.pinned || i >= n1 - out.pinned; };
    for (int i = 0; i < n1; ++i)
        if (pinned(i))
            for (int j = 0; j < n2; ++j) V[size_t(i) * n2 + j] = opt.edge(grid.node(i, j));

    Sweeper sw(grid);
    std::vector<double> next = V;
    const int jobs = std::max(1, opt.jobs);
    for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        auto work = [&](int c0, int c1, double& upd, bool& mono) {
            for (int i = c0; i < c1; ++i) {
                if (pinned(i)) continue;
                for (int j = 1; j < n2; ++j) {
                    double old = V[size_t(i) * n2 + j];
                    double nv = sw.best(V, i, j, W);
                    if (nv < old) mono = false;
                    next[size_t(i) * n2 + j] = nv;
                    upd = std::max(upd, nv - old);
                }
            }
        };
        double upd = 0;
        bool mono = true;
        if (jobs == 1) {
            work(0, n1, upd, mono);
        } else {
            std::vector<std::thread> th;
            std::vector<double> u(jobs, 0);
            std::vector<char> m(jobs, 1);
            for (int k = 0; k < jobs; ++k) {
                int c0 = n1 * k / jobs, c1 = n1 * (k + 1) / jobs;
                th.emplace_back([&, k, c0, c1] {
                    bool mk = true;
                    work(c0, c1, u[k], mk);
                    m[k] = mk;
                });
            }
            for (auto& t : th) t.join();
            for (int k = 0; k < jobs; ++k) {
                upd = std::max(upd, u[k]);
                mono = mono && m[k];
            }
        }
        V.swap(next);
        out.sweeps = sweep;
        out.last_update = upd;
        out.monotone = out.monotone && mono;
        if (upd < tol) {
            out.V = std::move(V);
            return out;
        }
    }
    std::ostringstream os;
    os.precision(17);
    os << "grid iteration did not settle after " << opt.max_sweeps << " sweeps, last update " << out.last_update;
    throw Error(Fault::no_convergence, os.str());
}

OracleComparison compare(const BellmanCandidate& bc, const GridValues& V) {
    const GridDomain& g = V.grid;
    if (std::abs(bc.eps() - g.eps) > 1e-15 * g.eps) throw Error(Fault::input, "candidate and grid use different eps");
    OracleComparison c;
    for (int i = V.pinned + 2; i <= g.n1 - 3 - V.pinned; ++i)
        for (int j = 0; j < g.n2; ++j) {
            Point x = g.node(i, j);
            double B = bc.eval(x).B;
            double d = V.at(i, j) - B;
            ++c.points;
            c.max_excess = std::max(c.max_excess, d);
            if (std::abs(d) > c.max_abs) {
                c.max_abs = std::abs(d);
                c.where = x;
            }
            c.max_rel = std::max(c.max_rel, std::abs(d) / (1 + std::abs(B)));
        }
    return c;
}

void write_grid_csv(std::ostream& os, const GridValues& V, const BellmanCandidate& bc) {
    const GridDomain& g = V.grid;
    os.precision(17);
    os << "x1,x2,V,B,diff\n";
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) {
            Point x = g.node(i, j);
            double B = bc.eval(x).B;
            os << x.x1 << ',' << x.x2 << ',' << V.at(i, j) << ',' << B << ',' << V.at(i, j) - B << '\n';
        }
}

}  // namespace bellman
