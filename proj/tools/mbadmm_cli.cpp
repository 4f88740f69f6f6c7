#include <iostream>
#include <string>
#include <vector>

#include "mbadmm/experiment.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mbadmm::run_cli(args, std::cout, std::cerr);
}
