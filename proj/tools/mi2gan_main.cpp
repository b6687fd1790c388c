#include "mi2gan/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mi2gan::run_cli(std::move(args));
}
