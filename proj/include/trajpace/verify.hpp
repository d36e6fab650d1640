#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace trajpace {

struct SuiteResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  std::vector<std::string> failure_notes;

  bool ok() const { return failures == 0; }
};

// Names: duality, interval, contrarian, optional-sampling, merton,
// martingale-sandwich, debt-limit, fast-trends, oracle-agreement.
std::vector<std::string> verify_suite_names();

// Runs one randomized property suite over `cases` seeded instances.
// `depth` caps instance size where the suite enumerates exhaustively.
// Error: invalid_input for an unknown suite name.
SuiteResult run_verify_suite(const std::string& name, std::uint64_t seed, int cases,
                             int depth = 3);

}  // namespace trajpace
