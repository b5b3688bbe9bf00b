#include <iostream>

#include "ctwpc/cli.hpp"

int main(int argc, char** argv) { return ctwpc::cli::run(argc, argv, std::cout, std::cerr); }
