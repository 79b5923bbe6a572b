#include <iostream>

#include "judgeforge/cli/cli.hpp"

int main(int argc, char** argv) { return judgeforge::cli::run(argc, argv, std::cout, std::cerr); }
