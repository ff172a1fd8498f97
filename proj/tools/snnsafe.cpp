#include "snnsafe/cli.hpp"

int main(int argc, char** argv) { return snnsafe::cli::run(argc, argv); }
