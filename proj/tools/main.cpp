// Command-line front end: reproduction numbers, bifurcation coefficients,
// continuation branches, and the verification suites, as JSON or CSV.
//
// Exit codes: 0 success, 1 check or computation failure, 2 usage/config error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bifurcat/bifcoeffs.hpp"
#include "bifurcat/common.hpp"
#include "bifurcat/continuation.hpp"
#include "bifurcat/io.hpp"
#include "bifurcat/model.hpp"
#include "bifurcat/model_parse.hpp"
#include "bifurcat/ngm.hpp"
#include "bifurcat/steadystate.hpp"
#include "bifurcat/verify.hpp"

namespace {

using namespace bifurcat;

struct CommonOpts {
  std::string model;
  std::string config;
  std::vector<std::string> params;
  std::string out;
  std::string format = "json";
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--model", o.model, "Built-in model id or model file path");
  cmd->add_option("--config", o.config, "Flat key=value config file");
  cmd->add_option("--param", o.params, "Parameter assignment name=value (repeatable)");
  cmd->add_option("--out", o.out, "Output file (default: stdout)");
  cmd->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--jobs", o.jobs, "Worker count for inner sweeps (reserved)")
      ->check(CLI::PositiveNumber);
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double parse_value(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(what + ": cannot parse '" + text + "' as a number");
  }
}

// Holds a parsed user model so a stable reference can be handed around.
struct ResolvedModel {
  std::optional<ModelSystem> owned;
  const ModelSystem* model = nullptr;
  ParamMap params;
};

ResolvedModel resolve(const CommonOpts& o) {
  ResolvedModel r;
  std::string model_id = o.model;
  if (!o.config.empty()) {
    const Config cfg = load_config(o.config);
    r.params = cfg.params;
    if (model_id.empty()) model_id = cfg.model_id;
  }
  if (model_id.empty())
    throw UsageError("no model given: use --model or a config file with a model= line");
  if (model_id.find('/') != std::string::npos ||
      std::filesystem::exists(model_id)) {
    r.owned = parse_model_file(model_id);
    r.model = &*r.owned;
  } else {
    r.model = &builtin_model(model_id);
  }
  for (const std::string& assign : o.params) {
    const auto eq = assign.find('=');
    if (eq == std::string::npos)
      throw UsageError("--param expects name=value, got '" + assign + "'");
    const std::string name = assign.substr(0, eq);
    r.params.set(name, parse_value(assign.substr(eq + 1), "--param " + name));
  }
  for (const auto& [name, value] : r.params.values()) {
    (void)value;
    if (std::find(r.model->param_names.begin(), r.model->param_names.end(), name) ==
        r.model->param_names.end())
      throw UsageError("unknown parameter '" + name + "' for model " + r.model->id);
  }
  for (const std::string& name : r.model->param_names)
    if (!r.params.has(name))
      throw UsageError("missing parameter '" + name + "' for model " + r.model->id);
  r.model->require_admissible(r.params);
  return r;
}

void write_output(const CommonOpts& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(o.out, std::ios::binary);
  if (!os) throw UsageError("cannot open output file " + o.out);
  os << text;
}

int run_r0(const CommonOpts& o) {
  ResolvedModel r;
  try {
    r = resolve(o);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  const R0Report rep = r0(*r.model, r.params);
  std::string text;
  if (o.format == "json") {
    text = to_json(rep) + "\n";
  } else {
    std::ostringstream os;
    os << "# schema=r0/1 model=" << r.model->id << "\n";
    os << "key,value\n";
    os << "r0," << fmt_double(rep.r0) << "\n";
    os << "dfe_stability," << to_string(rep.dfe_stability) << "\n";
    for (int i = 0; i < rep.dfe_eigenvalues.size(); ++i)
      os << "dfe_eig_" << i << "," << fmt_double(rep.dfe_eigenvalues[i].real())
         << (rep.dfe_eigenvalues[i].imag() >= 0 ? "+" : "")
         << fmt_double(rep.dfe_eigenvalues[i].imag()) << "i\n";
    text = os.str();
  }
  write_output(o, text);
  return 0;
}

int run_coeffs(const CommonOpts& o, const std::string& alpha1,
               const std::string& alpha2, double tol_a, bool tol_a_set,
               bool solve_threshold) {
  ResolvedModel r;
  try {
    r = resolve(o);
    if (alpha1.empty()) throw UsageError("coeffs requires --alpha1 <parameter>");
    if (!r.params.has(alpha1))
      throw UsageError("unknown parameter '" + alpha1 + "' for model " + r.model->id);
    if (!alpha2.empty() && !r.params.has(alpha2))
      throw UsageError("unknown parameter '" + alpha2 + "' for model " + r.model->id);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  if (solve_threshold) {
    const double t = alpha1_at_threshold(*r.model, r.params, alpha1);
    r.params.set(alpha1, t);
    std::cerr << "threshold: " << alpha1 << " = " << fmt_double(t) << "\n";
  }
  CenterCoefficients C = coefficients(*r.model, r.params, alpha1, alpha2);
  if (tol_a_set) C.a_scale = tol_a / 1e-7;  // tol_a() = 1e-7 * a_scale
  const BifClass cls = classify(C);
  std::string text;
  if (o.format == "json") {
    text = to_json(C, cls) + "\n";
  } else {
    std::ostringstream os;
    os << "# schema=coeffs/1 model=" << r.model->id << " alpha1=" << alpha1
       << " alpha2=" << (alpha2.empty() ? "-" : alpha2) << "\n";
    os << "key,value\n";
    os << "a," << fmt_double(C.a) << "\n";
    os << "b," << fmt_double(C.b) << "\n";
    os << "c," << fmt_double(C.c) << "\n";
    os << "d," << fmt_double(C.d) << "\n";
    os << "e," << fmt_double(C.e) << "\n";
    os << "fuualpha1," << fmt_double(C.fuualpha1) << "\n";
    os << "fualpha2," << fmt_double(C.fualpha2) << "\n";
    os << "d_corrected," << fmt_double(C.d_corrected) << "\n";
    os << "e_corrected," << fmt_double(C.e_corrected) << "\n";
    os << "a_scale," << fmt_double(C.a_scale) << "\n";
    os << "classification," << cls.primary << "\n";
    text = os.str();
  }
  write_output(o, text);
  return 0;
}

int run_branch(const CommonOpts& o, const std::string& alpha1,
               const std::string& range) {
  ResolvedModel r;
  TraceOptions topts;
  double lo = 0.0, hi = 0.0;
  bool has_range = false;
  try {
    r = resolve(o);
    if (alpha1.empty()) throw UsageError("branch requires --alpha1 <parameter>");
    if (!r.params.has(alpha1))
      throw UsageError("unknown parameter '" + alpha1 + "' for model " + r.model->id);
    if (!range.empty()) {
      const auto colon = range.find(':');
      if (colon == std::string::npos)
        throw UsageError("--range expects lo:hi, got '" + range + "'");
      lo = parse_value(range.substr(0, colon), "--range lo");
      hi = parse_value(range.substr(colon + 1), "--range hi");
      if (!(lo < hi)) throw UsageError("--range expects lo < hi");
      topts.alpha1_min = lo;
      topts.alpha1_max = hi;
      has_range = true;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  const std::vector<SteadyState> states = enumerate_states(*r.model, r.params);
  if (states.empty()) {
    std::cerr << "error: no steady state found at the given parameters\n";
    return 1;
  }
  const SteadyState& start = states.back();  // largest infected mass
  const double a1 = r.params.at(alpha1);
  const int direction = has_range && (a1 - lo > hi - a1) ? -1 : has_range ? +1 : -1;
  const Branch br = trace(*r.model, r.params, alpha1, start, direction, topts);
  std::ostringstream os;
  if (o.format == "csv")
    export_csv(br, os);
  else
    export_json(br, os);
  write_output(o, os.str());
  return 0;
}

int run_verify(const std::string& suite, std::uint64_t seed,
               const std::string& self, const CommonOpts& o) {
  std::vector<SuiteResult> results;
  try {
    if (suite == "all")
      results = run_verify_all(seed, self);
    else
      results.push_back(run_verify_suite(suite, seed, self));
  } catch (const UsageError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  std::ostringstream os;
  bool all_pass = true;
  for (const auto& r : results) {
    print_suite_result(r, os);
    all_pass = all_pass && r.pass();
  }
  os << (all_pass ? "verify: PASS" : "verify: FAIL") << "\n";
  write_output(o, os.str());
  return all_pass ? 0 : 1;
}

std::string self_path(const char* argv0) {
  std::error_code ec;
  const auto exe = std::filesystem::canonical("/proc/self/exe", ec);
  if (!ec) return exe.string();
  return argv0 ? argv0 : "bifurcat";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bifurcation analysis for parameterized ODE models"};
  app.require_subcommand(1);

  CommonOpts o_r0, o_coeffs, o_branch, o_verify;
  std::string alpha1_c, alpha2_c, alpha1_b, range_b, suite = "all";
  double tol_a = 0.0;
  bool solve_threshold = false;
  std::uint64_t seed = 20240817;

  CLI::App* c_r0 = app.add_subcommand("r0", "Reproduction number and DFE stability");
  add_common(c_r0, o_r0);

  CLI::App* c_co = app.add_subcommand("coeffs", "Bifurcation coefficients a, b, c, d, e");
  add_common(c_co, o_coeffs);
  c_co->add_option("--alpha1", alpha1_c, "Bifurcation parameter (required)");
  c_co->add_option("--alpha2", alpha2_c, "Unfolding parameter (optional)");
  CLI::Option* tol_opt =
      c_co->add_option("--tol-a", tol_a, "Override the |a| ~ 0 decision tolerance");
  c_co->add_flag("--at-threshold", solve_threshold,
                 "First solve alpha1 so that R0 = 1");

  CLI::App* c_br = app.add_subcommand("branch", "Pseudo-arclength continuation branch");
  add_common(c_br, o_branch);
  c_br->add_option("--alpha1", alpha1_b, "Continuation parameter (required)");
  c_br->add_option("--range", range_b, "Parameter window lo:hi");

  CLI::App* c_ve = app.add_subcommand("verify", "Run verification suites");
  add_common(c_ve, o_verify);
  c_ve->add_option("suite", suite, "Suite name or 'all'");
  c_ve->add_option("--seed", seed, "Random seed for the verification draws");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (c_r0->parsed()) return run_r0(o_r0);
    if (c_co->parsed())
      return run_coeffs(o_coeffs, alpha1_c, alpha2_c, tol_a, tol_opt->count() > 0,
                        solve_threshold);
    if (c_br->parsed()) return run_branch(o_branch, alpha1_b, range_b);
    if (c_ve->parsed()) return run_verify(suite, seed, self_path(argv[0]), o_verify);
  } catch (const UsageError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 2;
}
