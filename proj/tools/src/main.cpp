#include <iostream>
#include <string>
#include <vector>

#include "okp_cli/commands.hpp"

int main(int argc, char** argv) {
    return okp::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
