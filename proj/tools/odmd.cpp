#include "odmd/cli.hpp"

int main(int argc, char** argv) { return odmd::cli::run(argc, argv); }
