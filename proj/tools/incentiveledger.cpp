#include "cli.hpp"

int main(int argc, char** argv) { return incentive_ledger::cli::run_cli(argc, argv); }
