#include <iostream>

#include "srv6sfc/cli.hpp"

int main(int argc, char** argv) { return srv6sfc::run_cli(argc, argv, std::cout, std::cerr); }
