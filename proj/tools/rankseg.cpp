#include "rankseg/cli.hpp"

int main(int argc, char** argv) { return rankseg::cli::run_cli(argc, argv); }
