#include "naminglab/cli.hpp"

int main(int argc, char** argv) { return naminglab::run_cli(argc, argv); }
