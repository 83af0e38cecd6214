#include <iostream>
#include <string>
#include <vector>

#include "ikg/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ikg::run_cli(args, std::cout, std::cerr);
}
