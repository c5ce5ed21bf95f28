#include "fwdegen/cli.hpp"

int main(int argc, char** argv) { return fwdegen::cli::main_entry(argc, argv); }
