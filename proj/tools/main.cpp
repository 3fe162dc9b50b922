#include <iostream>

#include "pglfree/cli.hpp"

int main(int argc, char** argv) { return pglfree::cli::run(argc, argv, std::cout, std::cerr); }
