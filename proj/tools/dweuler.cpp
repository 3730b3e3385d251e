#include <iostream>

#include "dweuler/cli.hpp"

int main(int argc, char** argv) {
  return dweuler::cli_main(argc, argv, std::cout, std::cerr);
}
