#include "ehs/cli.hpp"

int main(int argc, char** argv) { return ehs::cli::run(argc, argv); }
