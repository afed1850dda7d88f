#include <iostream>
#include <string>
#include <vector>

#include "cartwright/cli_report.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cartwright::cli::run_cli(args, std::cout, std::cerr);
}
