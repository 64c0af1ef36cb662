// Regenerates the bundled fixture city: make_fixture <output dir>

#include <iostream>

#include "synthetic_city.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixture <output dir>\n";
    return 1;
  }
  fixture::CityOptions options;
  std::cout << fixture::write_city(argv[1], options).string() << "\n";
  return 0;
}
