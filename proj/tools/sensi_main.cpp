#include "sensi/cli.hpp"

#include <iostream>

int
main(int argc, char** argv)
{
  return sensi::run_cli(argc, argv, std::cout, std::cerr);
}
