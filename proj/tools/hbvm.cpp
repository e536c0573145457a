#include <iostream>

#include "hbvm/cli.hpp"

int main(int argc, char** argv) { return hbvm::cli::run(argc, argv, std::cout, std::cerr); }
