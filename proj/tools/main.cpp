#include <iostream>

#include "dbands/cli.hpp"

int main(int argc, char** argv) { return dbands::cli::run(argc, argv, std::cout, std::cerr); }
