#include <string>
#include <vector>

#include "nvmem/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nvmem::run_cli(args);
}
