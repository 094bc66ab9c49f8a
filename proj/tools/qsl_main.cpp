#include "qsl/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return qsl::run_cli(argc, argv, std::cout, std::cerr);
}
