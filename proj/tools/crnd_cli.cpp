#include <iostream>
#include <string>
#include <vector>

#include "crnd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return crnd::dispatch(args, std::cout, std::cerr);
}
