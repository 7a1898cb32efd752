// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "cityroad/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int k = 1; k < argc; ++k) ids.push_back(std::atoi(argv[k]));
  int failed = 0;
  cityroad::run_acceptance(ids, [&](const cityroad::CriterionResult& r) {
    std::printf("%s\n", cityroad::format_result(r).c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  });
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
