#include <iostream>
#include <string>
#include <vector>

#include "pibench/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pibench::dispatch(args, std::cout, std::cerr);
}
