// Runs every acceptance criterion and prints one pass/fail line per criterion.
// Optional arguments restrict the run to the given criterion ids.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "acceptance.h"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  const auto results = bwcr::acceptance::run(ids);
  bwcr::acceptance::print_table(std::cout, results);
  for (const auto& r : results) {
    if (!r.passed) return 1;
  }
  return 0;
}
