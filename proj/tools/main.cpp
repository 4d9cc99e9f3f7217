#include "hdfactor/cli.hpp"

int main(int argc, char** argv) { return hdfactor::cli::run(argc, argv); }
