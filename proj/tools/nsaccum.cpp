#include "nsa/cli.hpp"

int main(int argc, char** argv) { return nsa::cli::run(argc, argv); }
