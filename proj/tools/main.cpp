#include <iostream>

#include "scsim/cli.hpp"

int main(int argc, char** argv) { return scsim::run_cli(argc, argv, std::cout, std::cerr); }
