#include <iostream>

#include "gmt/cli.hpp"

int main(int argc, char** argv) { return gmt::cli::main(argc, argv, std::cout, std::cerr); }
