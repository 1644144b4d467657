#include <iostream>
#include <string>
#include <vector>

#include "bitsys/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bitsys::cli_main(args, std::cout, std::cerr);
}
