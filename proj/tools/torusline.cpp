#include "torusline/cli.hpp"

int main(int argc, char** argv) { return torusline::cli::run(argc, argv); }
