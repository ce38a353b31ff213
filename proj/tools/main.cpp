#include "mvsde/cli.hpp"

int main(int argc, char** argv) { return mvsde::cli::run_cli(argc, argv); }
