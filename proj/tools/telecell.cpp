#include <iostream>

#include "telecell/cli.hpp"

int main(int argc, char **argv) {
    return telecell::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
