// Prints one PASS/FAIL line per criterion; exits non-zero if any failed.
// Optional arguments select criteria by number, e.g. `monotx_acceptance 1 3`.

#include <cstdlib>
#include <iostream>
#include <string>

#include "monotx/acceptance.hpp"

int main(int argc, char **argv) {
  monotx::acceptance::Options options;
  for (int i = 1; i < argc; ++i) options.only.push_back(std::atoi(argv[i]));
  options.log = [](const std::string &line) {
    if (line.rfind("PASS", 0) != 0 && line.rfind("FAIL", 0) != 0) {
      std::cerr << "  " << line << '\n';
    }
  };
  const auto results = monotx::acceptance::run(options);
  int failed = 0;
  for (const auto &r : results) {
    std::cout << monotx::acceptance::format_line(r) << std::endl;
    failed += !r.passed;
  }
  std::cout << results.size() - failed << "/" << results.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
