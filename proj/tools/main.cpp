#include "fallingballs/cli.hpp"

int main(int argc, char** argv) { return fallingballs::run_cli(argc, argv); }
