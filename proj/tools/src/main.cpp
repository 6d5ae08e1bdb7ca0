#include <iostream>

#include "resil/app.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return resil::run(args, std::cout, std::cerr);
}
