#include "irl/cli.hpp"

int main(int argc, char** argv) { return irl::run_cli(argc, argv); }
