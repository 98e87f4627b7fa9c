#include <iostream>

#include "fieldsim/cli/cli.hpp"

int main(int argc, char** argv) { return fieldsim::cli::run(argc, argv, std::cout, std::cerr); }
