#include "lumen/cli.hpp"

int main(int argc, char** argv) { return lumen::run_cli(argc, argv); }
