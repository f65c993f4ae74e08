#include "cli.hpp"

int main(int argc, char** argv) { return lesiontrack::run_cli(argc, argv); }
