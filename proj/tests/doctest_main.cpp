#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "ethlab/linalg.hpp"

int main(int argc, char** argv) {
    ethlab::blas_guard(argv);
    doctest::Context ctx(argc, argv);
    return ctx.run();
}
