#include <iostream>

#include "tablesum/cli.hpp"

int main(int argc, char** argv) { return tablesum::cli::run(argc, argv, std::cout, std::cerr); }
