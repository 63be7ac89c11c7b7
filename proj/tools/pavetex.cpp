#include <iostream>
#include <string>
#include <vector>

#include "pavetex/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pavetex::run_cli(args, std::cout, std::cerr);
}
