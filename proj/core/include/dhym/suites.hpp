#pragma once

// Canned property suites shared by the acceptance binary and `dhym verify`.
//
// Each check reports a measured value against a pinned limit. Checks that
// correspond to a numbered acceptance criterion carry its number; the rest
// (criterion == 0) are supporting checks of the same suite.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dhym/lemma_checks.hpp"

namespace dhym {

struct Check {
  int criterion = 0;
  std::string name;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
  /// one-line human summary
  std::string detail;
  /// wall time; not part of any deterministic output
  double seconds = 0.0;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = kDefaultSeed;
  std::vector<Check> checks;
  /// empirical constants keyed by name
  std::map<std::string, double> constants;

  bool passed() const;
  int violations() const;
};

/// eigenops, functionals, flow, geodesic, regularize
const std::vector<std::string>& suite_names();

/// Throws InvalidInput for an unknown suite.
SuiteReport run_suite(const std::string& name, std::uint64_t seed = kDefaultSeed);

}  // namespace dhym
