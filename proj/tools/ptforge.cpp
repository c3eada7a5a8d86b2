#include <iostream>

#include "ptforge/cli/app.hpp"

int main(int argc, char** argv) {
  return ptforge::cli::Run({argv + 1, argv + argc}, std::cout, std::cerr);
}
