#include <iostream>

#include "ttrp/cli.hpp"

int main(int argc, char** argv) { return ttrp::cli::run(argc, argv, std::cout, std::cerr); }
