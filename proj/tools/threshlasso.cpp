#include <iostream>

#include "threshlasso/cli.hpp"

int main(int argc, char** argv) { return threshlasso::cli::run(argc, argv, std::cout, std::cerr); }
