#include <iostream>

#include "conquer/cli/cli.hpp"

int main(int argc, char** argv) { return conquer::cli::run_cli(argc, argv, std::cout, std::cerr); }
