#include <iostream>

#include "leapnet/cli.hpp"

int main(int argc, char** argv) {
    return leapnet::cli::run(argc, argv, std::cout, std::cerr);
}
