#include <string>
#include <vector>

#include "suitegen/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return suitegen::cli::dispatch(args);
}
