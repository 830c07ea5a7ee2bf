#include "wsnloc/cli.hpp"

int main(int argc, char** argv) { return wsnloc::cli::dispatch(argc, argv); }
