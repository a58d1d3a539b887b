// Runs every suite with the default seed and prints one line per numbered
// criterion, followed by the supporting checks. Exit status is nonzero if
// any check fails.

#include <cstdio>
#include <exception>
#include <map>
#include <vector>

#include "dhym/suites.hpp"

int main() {
  using namespace dhym;
  std::map<int, Check> numbered;
  std::vector<std::pair<std::string, Check>> supporting;
  std::vector<std::pair<std::string, std::string>> crashed;

  for (const std::string& name : suite_names()) {
    try {
      SuiteReport rep = run_suite(name, kDefaultSeed);
      for (Check& c : rep.checks) {
        if (c.criterion > 0)
          numbered[c.criterion] = std::move(c);
        else
          supporting.emplace_back(name, std::move(c));
      }
    } catch (const std::exception& e) {
      crashed.emplace_back(name, e.what());
    }
  }

  int failures = 0;
  for (int k = 1; k <= 12; ++k) {
    auto it = numbered.find(k);
    if (it == numbered.end()) {
      std::printf("[FAIL] %2d (not run)\n", k);
      ++failures;
      continue;
    }
    const Check& c = it->second;
    if (!c.passed) ++failures;
    std::printf("[%s] %2d %s: %s (%.1f s)\n", c.passed ? "PASS" : "FAIL", k, c.name.c_str(),
                c.detail.c_str(), c.seconds);
  }
  std::printf("\nsupporting checks\n");
  for (const auto& [suite, c] : supporting) {
    if (!c.passed) ++failures;
    std::printf("[%s] %s/%s: %s\n", c.passed ? "PASS" : "FAIL", suite.c_str(), c.name.c_str(),
                c.detail.c_str());
  }
  for (const auto& [suite, what] : crashed) {
    std::printf("[FAIL] suite %s aborted: %s\n", suite.c_str(), what.c_str());
    ++failures;
  }
  std::printf("\n%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
