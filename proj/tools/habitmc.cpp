#include "habitmc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return habitmc::run_cli(argc, argv, std::cout, std::cerr);
}
