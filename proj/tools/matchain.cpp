#include "matchain/cli.hpp"

int main(int argc, char** argv) { return matchain::run_cli(argc, argv); }
