#include <iostream>
#include <string>
#include <vector>

#include "lowlight/allocator.hpp"
#include "lowlight/cli.hpp"

int main(int argc, char** argv) {
    lowlight::configure_allocator();
    return lowlight::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
