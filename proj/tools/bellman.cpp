#include <iostream>

#include "bellman/cli.hpp"

int main(int argc, char** argv) { return bellman::run_cli(argc, argv, std::cout, std::cerr); }
