#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qplab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

// Runs the acceptance criteria (all when `only` is empty) and prints one
// PASS/FAIL line per criterion to `log`.
std::vector<CriterionResult> run_acceptance(std::span<const int> only, std::ostream& log);

}  // namespace qplab
