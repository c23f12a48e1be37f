#include <iostream>

#include "ep3/cli.hpp"

int main(int argc, char** argv) { return ep3::run_cli(argc, argv, std::cout, std::cerr); }
