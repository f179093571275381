#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace bellman {

inline constexpr double inf = std::numeric_limits<double>::infinity();

enum class Fault {
    input,
    non_alternating_signs,
    divergent,
    degenerate_transform,
    seed_invalid,
    continuation_stall,
    out_of_range,
    out_of_domain,
    bracket_invalid,
    unbalanced,
    outside_figure,
    glue_failure,
    outside_strip,
    eps_too_large,
    step_too_large,
    unknown_configuration,
    iteration_cap,
    synthesis_failure,
    no_convergence,
};

const char* fault_name(Fault f);

class Error : public std::runtime_error {
public:
    Error(Fault f, const std::string& what) : std::runtime_error(what), fault_(f) {}
    Fault fault() const { return fault_; }

private:
    Fault fault_;
};

}  // namespace bellman
