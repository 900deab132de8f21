#include <iostream>
#include <string>
#include <vector>

#include "geoaudit/cli.hpp"

int main(int argc, char** argv) {
  return geoaudit::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
