#include "abmap/cli.hpp"

int main(int argc, char** argv) { return abmap::cli::main(argc, argv); }
