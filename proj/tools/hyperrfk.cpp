#include <iostream>

#include "hyperrfk/cli_io.hpp"

int main(int argc, char** argv) { return hyperrfk::run_command(argc, argv, std::cout, std::cerr); }
