#include "inspire/cli.hpp"

int main(int argc, char** argv) { return inspire::cli::cli_dispatch(argc, argv); }
