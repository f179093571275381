#pragma once

#include <ostream>

#include "bellman/errors.hpp"

namespace bellman {

enum ExitCode {
    exit_ok = 0,
    exit_usage = 1,
    exit_condition = 2,
    exit_input = 3,
    exit_verification = 4,
    exit_iteration_cap = 5,
};

int exit_code_for(Fault f);

// bellman analyze|evolve|eval|optimize|verify|export --config <path> [--eps X] [--out DIR] [--jobs N] [--minimize]
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bellman
