#include "covshrink/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return covshrink::run_cli(argc, argv, std::cout, std::cerr);
}
