#include <iostream>

#include "magicdl/cli.hpp"

int main(int argc, char** argv) { return magicdl::run_cli(argc, argv, std::cout, std::cerr); }
