#include "drt/cli/commands.hpp"

int main(int argc, char** argv) { return drt::cli::run_cli(argc, argv); }
