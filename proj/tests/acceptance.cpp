// Acceptance gate: runs the numbered verification criteria end to end and
// prints one PASS/FAIL line per criterion. With an argument 1..10 only that
// criterion runs; without arguments all ten run in order. Exit code 0 only
// when every requested criterion passes.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "bifurcat/common.hpp"
#include "bifurcat/verify.hpp"

#ifndef BIFURCAT_CLI_PATH
#define BIFURCAT_CLI_PATH ""
#endif

int main(int argc, char** argv) {
  using namespace bifurcat;
  const auto& names = verify_suite_names();

  std::vector<int> indices;
  if (argc > 1) {
    const int idx = std::atoi(argv[1]);
    if (idx < 1 || idx > static_cast<int>(names.size())) {
      std::cerr << "usage: " << argv[0] << " [criterion 1.."
                << names.size() << "]\n";
      return 2;
    }
    indices.push_back(idx);
  } else {
    for (int i = 1; i <= static_cast<int>(names.size()); ++i) indices.push_back(i);
  }

  bool all_pass = true;
  for (int idx : indices) {
    const std::string& suite = names[static_cast<std::size_t>(idx - 1)];
    bool pass = false;
    try {
      const SuiteResult result = run_verify_suite(suite, 20240817, BIFURCAT_CLI_PATH);
      pass = result.pass();
      print_suite_result(result, std::cout);
    } catch (const std::exception& ex) {
      std::cout << "suite " << suite << ": exception: " << ex.what() << "\n";
    }
    std::cout << "criterion " << idx << " (" << suite << "): "
              << (pass ? "PASS" : "FAIL") << "\n";
    all_pass = all_pass && pass;
  }
  return all_pass ? 0 : 1;
}
