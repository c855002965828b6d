#include <iostream>

#include "pnp/cli.hpp"

int main(int argc, char** argv) { return pnp::run_cli(argc, argv, std::cout, std::cerr); }
