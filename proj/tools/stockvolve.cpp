#include <iostream>

#include "stockvolve/cli.hpp"

int main(int argc, char** argv) { return stockvolve::cli::run(argc, argv, std::cout, std::cerr); }
