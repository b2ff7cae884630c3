#include "ergorate/cli.hpp"

int main(int argc, char** argv) { return ergorate::cli::main_entry(argc, argv); }
