#include <iostream>
#include <string>
#include <vector>

#include "discrimq/app/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return discrimq::app::run_command(args, std::cout, std::cerr);
}
