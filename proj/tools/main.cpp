#include "l1rx/cli.hpp"

int main(int argc, char** argv) { return l1rx::run_cli(argc, argv); }
