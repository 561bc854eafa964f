#include "scenario.hpp"

int main(int argc, char** argv) { return cosmoqm::cli::run_cli(argc, argv); }
