#include "efpo/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return efpo::cli::run(argc, argv, std::cout, std::cerr); }
