#include <iostream>

#include "nvbath/cli.hpp"

int main(int argc, char** argv) { return nvbath::run_cli(argc, argv, std::cout, std::cerr); }
