#include "crossdiff/cli.hpp"

int main(int argc, char** argv) { return crossdiff::run_cli(argc, argv); }
