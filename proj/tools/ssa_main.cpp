#include "ssa/cli.hpp"

int main(int argc, char** argv) { return ssa::run(argc, argv); }
