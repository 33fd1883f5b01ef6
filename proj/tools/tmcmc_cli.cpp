#include "tmcmc/cli.hpp"

int main(int argc, char** argv) { return tmcmc::cli::run(argc, argv); }
