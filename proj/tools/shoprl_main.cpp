#include <iostream>
#include <string>
#include <vector>

#include "shoprl/cli.hpp"

int main(int argc, char** argv) {
  return shoprl::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
