#include "grouptrack/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return grouptrack::run_cli(argc, argv, std::cout, std::cerr); }
