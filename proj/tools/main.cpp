#include "cli.hpp"

int main(int argc, char** argv) { return factorreg::cli::run(argc, argv); }
