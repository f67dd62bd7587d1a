#include <iostream>
#include <string>
#include <vector>

#include "boxfix/cli.hpp"

int main(int argc, char** argv) {
  return boxfix::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
