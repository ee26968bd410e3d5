#include <iostream>

#include "errp/cli_commands.hpp"

int main(int argc, char** argv) { return errp::cli::run(argc, argv, std::cout, std::cerr); }
