#include <iostream>

#include "cec/cli.hpp"

int main(int argc, char** argv) {
  return cec::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
