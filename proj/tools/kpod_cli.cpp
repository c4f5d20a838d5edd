#include "kpod/cli.hpp"

int main(int argc, char** argv) { return kpod::run_cli(argc, argv); }
