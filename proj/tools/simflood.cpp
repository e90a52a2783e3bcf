#include <iostream>

#include "simflood/cli.hpp"

int main(int argc, char** argv) { return simflood::run_cli(argc, argv, std::cout, std::cerr); }
