#include <iostream>

#include "wugnn_tools/cli.hpp"

int main(int argc, char** argv) { return wugnn::tools::cli_main(argc, argv, std::cout, std::cerr); }
