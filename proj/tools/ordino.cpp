#include <iostream>

#include "ordino/cli.hpp"

int main(int argc, char** argv) { return ordino::cli_dispatch(argc, argv, std::cout, std::cerr); }
