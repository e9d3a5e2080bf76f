#include "dtnname/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return dtnname::run_cli(argc, argv, std::cout, std::cerr);
}
