// Acceptance run: one PASS/FAIL line per criterion on the reference seed.
//   acceptance [--seed S] [--expect-fail N]...
// Exit status is nonzero if a criterion fails that was not listed with
// --expect-fail. Listed criteria still print their FAIL line.
#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "imm/harness.hpp"

int main(int argc, char** argv) {
  imm::HarnessOptions opt;
  std::vector<int> expected;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--seed") && i + 1 < argc) {
      opt.seed = std::stoull(argv[++i]);
    } else if (!std::strcmp(argv[i], "--expect-fail") && i + 1 < argc) {
      expected.push_back(std::stoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--seed S] [--expect-fail N]...\n");
      return 2;
    }
  }
  std::vector<imm::SuiteResult> results;
  int unexpected = 0;
  for (const auto& e : imm::suite_registry()) {
    auto r = imm::run_suite(e.name, opt);
    const bool ok = r.passed();
    const bool known = std::find(expected.begin(), expected.end(), r.criterion) != expected.end();
    if (!ok && !known) ++unexpected;
    std::printf("%s  %2d  %-13s %s (%.1fs)", ok ? "PASS" : "FAIL", r.criterion, r.name.c_str(),
                r.title.c_str(), r.seconds);
    if (!ok) std::printf("  -- %s%s", r.first_failure().c_str(), known ? " [expected]" : "");
    if (ok && known) std::printf("  [listed as expected failure]");
    std::printf("\n");
    std::fflush(stdout);
    results.push_back(std::move(r));
  }
  std::ofstream("acceptance_report.json") << imm::validation_report(results, opt).dump(2) << '\n';
  return unexpected == 0 ? 0 : 1;
}
