#include <iostream>

#include "falcon_cli.hpp"

int main(int argc, char** argv) {
  return falcon::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
