#include <iostream>

#include "tscmrar_cli/commands.hpp"

int main(int argc, char** argv) {
  return tscmrar::cli::run(argc, argv, std::cout, std::cerr);
}
