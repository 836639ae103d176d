#include <iostream>

#include "kdg/commands.hpp"

int main(int argc, char** argv) { return kdg::run_cli(argc, argv, std::cout, std::cerr); }
