#include "cli.hpp"

int main(int argc, char** argv) { return sconvex::cli::main_entry(argc, argv); }
