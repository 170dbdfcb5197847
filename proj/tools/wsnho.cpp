#include "wsnho/cli.hpp"

int main(int argc, char** argv) { return wsnho::cli::run_cli(argc, argv); }
