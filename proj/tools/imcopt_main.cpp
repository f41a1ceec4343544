#include "imcopt/cli.hpp"

int main(int argc, char** argv) { return imcopt::run_cli(argc, argv); }
