#include <iostream>

#include "per/cli.hpp"

int main(int argc, char** argv) { return per::cli_main(argc, argv, std::cout, std::cerr); }
