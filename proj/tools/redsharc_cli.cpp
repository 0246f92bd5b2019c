#include "redsharc/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return redsharc::cliMain(argc, argv, std::cin, std::cout, std::cerr);
}
