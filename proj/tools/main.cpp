#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return levylmm::run(argc, argv, std::cout, std::cerr); }
