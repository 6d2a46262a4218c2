#include "covert/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return covert::cli::run_main(argc, argv, std::cout, std::cerr); }
