#include "tabalign/cli.hpp"

int main(int argc, char** argv) { return tabalign::run_command(argc, argv); }
