#include <iostream>

#include "ehrelay/cli.hpp"

int main(int argc, char** argv) { return ehrelay::cli::run(argc, argv, std::cout, std::cerr); }
