#include "confcycle/cli.hpp"

int main(int argc, char** argv) { return confcycle::cli::main(argc, argv); }
