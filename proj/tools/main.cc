#include <iostream>

#include "mubinn/cli.h"

int main(int argc, char** argv) {
  return mubinn::run_cli(argc, argv, std::cout, std::cerr);
}
