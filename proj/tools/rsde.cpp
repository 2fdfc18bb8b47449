#include "rsde/cli/runner.hpp"

int main(int argc, char** argv) { return rsde::cli::run_cli(argc, argv); }
