#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bifurcat {

// One verification check: a named pass/fail with a human-readable detail
// line (tolerances, worst errors, counts).
struct SuiteCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Result of one verification suite. A suite passes when every check passes
// and at least one check ran.
struct SuiteResult {
  std::string suite;
  int index = 0;  // 1-based position in verify_suite_names()
  std::vector<SuiteCheck> checks;

  void add(const std::string& name, bool pass, const std::string& detail = "");
  bool pass() const;
};

// The ten suites, in canonical order:
//   oracles    closed-form derivative values at the DFE
//   r0         closed-form reproduction numbers vs the NGM spectral radius
//   brauer     two-method sign equivalence and c < 0 on the a = 0 set
//   theorem2   cholera-model construction (R0 = 1, a = 0, two-state wedge)
//   theorem3   hepatitis-model forward/backward sign law in F
//   theorem4   hepatitis-model construction incl. fold continuation
//   continuum  truncated-model steady-state family and coefficient split
//   parity     steady-state count parity against R0
//   foldslope  measured fold-locus slopes vs the 2e prediction
//   hygiene    null residuals, kernel invariance, deterministic reruns
const std::vector<std::string>& verify_suite_names();
bool is_verify_suite(const std::string& name);

// Runs one suite. `seed` feeds every randomized draw (fixed seed = fixed
// draws = byte-identical output). `cli_path`, when non-empty, names the
// command-line binary used by the hygiene suite's rerun check; when empty
// that check is skipped with a note. Throws UsageError for unknown names.
SuiteResult run_verify_suite(const std::string& name, std::uint64_t seed = 20240817,
                             const std::string& cli_path = "");

// All ten suites in canonical order.
std::vector<SuiteResult> run_verify_all(std::uint64_t seed = 20240817,
                                        const std::string& cli_path = "");

// Prints "suite <name>: PASS|FAIL (k/n checks)" followed by one indented
// line per check.
void print_suite_result(const SuiteResult& result, std::ostream& os);

}  // namespace bifurcat
