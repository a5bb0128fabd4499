#include <iostream>

#include "tmm/cli.hpp"

int main(int argc, char** argv) {
  return tmm::cli_dispatch({argv + 1, argv + argc}, std::cout, std::cerr);
}
