#include "alfilter/cli.hpp"

int main(int argc, char** argv) { return alf::cli::run(argc, argv); }
