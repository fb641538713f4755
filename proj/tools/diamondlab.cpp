#include <iostream>

#include "diamondlab/cli/run.hpp"

int main(int argc, char** argv) { return diamondlab::cli::main_entry(argc, argv, std::cout, std::cerr); }
