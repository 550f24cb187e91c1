// Acceptance gate: runs the spec'd criteria and prints one PASS/FAIL line per
// criterion. Exit code is the number of failing criteria.
//
//   acceptance            runs all criteria
//   acceptance 3 7        runs criteria 3 and 7 only

#include <cstdlib>
#include <iostream>
#include <vector>

#include "qplab/suite.hpp"

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto results = qplab::run_acceptance(only, std::cout);
  if (results.empty()) {
    std::cerr << "no criteria selected\n";
    return 2;
  }
  int failures = 0;
  for (const auto& r : results)
    if (!r.pass) ++failures;
  return failures;
}
