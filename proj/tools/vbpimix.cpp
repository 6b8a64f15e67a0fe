#include <iostream>

#include "vbpi/cli.hpp"

int main(int argc, char** argv) { return vbpi::RunCli(argc, argv, std::cout, std::cerr); }
