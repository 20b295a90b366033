#include "cli.hpp"

int main(int argc, char** argv) { return harp::cli::run_cli(argc, argv); }
