#include <iostream>

#include "blindspot/cli.h"

int main(int argc, char** argv) { return blindspot::run_cli(argc, argv, std::cout, std::cerr); }
