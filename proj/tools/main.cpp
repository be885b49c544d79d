#include <iostream>

#include "mcprioq/cli.hpp"

int main(int argc, char** argv) {
  return mcprioq::run_cli(argc, argv, std::cout, std::cerr);
}
