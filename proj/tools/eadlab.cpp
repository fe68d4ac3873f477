#include <iostream>
#include <string>
#include <vector>

#include "eadlab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return eadlab::run_cli(args, std::cout, std::cerr);
}
