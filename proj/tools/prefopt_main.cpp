#include <iostream>

#include "prefopt/pipeline.hpp"

int main(int argc, char** argv) { return prefopt::pipeline::run_cli(argc, argv, std::cout, std::cerr); }
