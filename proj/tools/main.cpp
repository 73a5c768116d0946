#include "interdyn/cli.hpp"

int main(int argc, char** argv) { return interdyn::cli::run(argc, argv); }
