#include <iostream>
#include <string>
#include <vector>

#include "evcalc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return evcalc::cli::run_command(std::move(args), std::cout, std::cerr);
}
