#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "lowlight/allocator.hpp"

int main(int argc, char** argv) {
    lowlight::configure_allocator();
    doctest::Context context(argc, argv);
    return context.run();
}
