#include <iostream>

#include "mwcons/cli.hpp"

int main(int argc, char** argv) {
  return mwcons::cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
