#include "odigen/cli.hpp"

int main(int argc, char** argv) { return odigen::cli::run(argc, argv); }
