#include <string>
#include <vector>

#include "csense/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return csense::run_cli(args);
}
