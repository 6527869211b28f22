#include "cli.hpp"

int main(int argc, char** argv) { return tripletbench::cli::run_cli(argc, argv); }
