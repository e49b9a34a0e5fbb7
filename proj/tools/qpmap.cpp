#include <iostream>

#include "qp/cli.hpp"

int main(int argc, char** argv) { return qp::cli::run(argc, argv, std::cout, std::cerr); }
