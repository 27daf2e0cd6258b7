#include "cli.hpp"

int main(int argc, char** argv) { return qscat::cli::main_entry(argc, argv); }
