#include <iostream>

#include "distopt/acceptance.hpp"

int main() {
  const auto results = distopt::accept::run_all(DISTOPT_DATA_DIR);
  const int failures = distopt::accept::report(results, std::cout);
  return failures > 0 ? 1 : 0;
}
