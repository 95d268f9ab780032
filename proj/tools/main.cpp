#include <iostream>

#include "runner.hpp"

int main(int argc, char** argv) { return dioph::cli::run_cli(argc, argv, std::cout, std::cerr); }
