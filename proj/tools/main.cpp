#include "tcar/cli.hpp"

int main(int argc, char** argv) { return tcar::run_cli(argc, argv); }
