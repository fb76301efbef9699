#include <iostream>
#include <string>
#include <vector>

#include "readout/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return readout::cli::run(args, std::cout, std::cerr);
}
