#include "cfmec/cli.hpp"

int main(int argc, char** argv) { return cfmec::cli::main_entry(argc, argv); }
