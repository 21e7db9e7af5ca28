#include "wdc/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return wdc::cli::run(argc, argv, std::cout, std::cerr);
}
