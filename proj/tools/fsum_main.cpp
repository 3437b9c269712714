#include "fsum/cli.hpp"

int main(int argc, char** argv) { return fsum::run_cli(argc, argv); }
