#include <iostream>

#include "causalin/cli.hpp"

int main(int argc, char** argv)
{
    return causalin::cli::run(argc, argv, std::cin, std::cout, std::cerr);
}
