#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bellman/boundary_function.hpp"
#include "bellman/candidates.hpp"
#include "bellman/oracle.hpp"
#include "bellman/verify.hpp"

namespace bellman {

// numbers, with "inf" / "-inf" for the extended reals
double json_real(const nlohmann::json& j);
nlohmann::json real_json(double v);

// {pieces:[{lo,hi,poly,exp:[{a,b}],trig:[{a,b,c}]}], eps_inf, roots_override?}
BoundaryFunction boundary_from_json(const nlohmann::json& j);
nlohmann::json boundary_to_json(const BoundaryFunction& bf);

struct EpsSweep {
    double from = 0, to = 0;
    int samples = 0;
    std::vector<double> values() const;
};

struct RunConfig {
    std::filesystem::path path;  // where the config was read from
    std::string name;
    BoundaryFunction bf;
    std::optional<double> eps;
    std::optional<EpsSweep> sweep;
    std::vector<Point> points;
    double x_lo = -2, x_hi = 2;  // range for sampling, export and property checks
    int samples = 200;            // random points for optimize / verify when none are listed
    std::uint64_t seed = 1;
    std::optional<GridDomain> grid;
    double oracle_abs = inf, oracle_rel = inf;
    std::optional<std::filesystem::path> graph;  // verify this graph instead of evolving
    std::filesystem::path out = "out";
    bool minimize = false;
    PropertyOptions properties;

    // eps of the run: the explicit value, else the end of the sweep
    double run_eps() const;
};

// throws Error(Fault::input) with the parser diagnostics
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base = ".");

// CSV with a header line and columns x1, x2
std::vector<Point> read_points_csv(const std::filesystem::path& path);

}  // namespace bellman
