#include <iostream>

#include "flatpath/cli.hpp"

int main(int argc, char** argv)
{
    return flatpath::cli::run(argc, argv, std::cout, std::cerr);
}
