#include <iostream>
#include <string>
#include <vector>

#include "oclust/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return oclust::cli::run(args, std::cout, std::cerr);
}
