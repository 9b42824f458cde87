#include "fastpc/cli.hpp"

int main(int argc, char** argv) { return fastpc::cli::main(argc, argv); }
