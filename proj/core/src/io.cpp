#include "bifurcat/io.hpp"

#include <cctype>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

namespace bifurcat {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw UsageError("config value for '" + key + "' is not a number: '" + t + "'");
  }
  if (pos != t.size())
    throw UsageError("config value for '" + key + "' is not a number: '" + t + "'");
  return value;
}

ordered_json complex_array(const CVec& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    arr.push_back({{"re", v[i].real()}, {"im", v[i].imag()}});
  return arr;
}

ordered_json vec_array(const Vec& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

ordered_json mat_array(const Mat& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

ordered_json params_object(const ParamMap& p) {
  ordered_json obj = ordered_json::object();
  for (const auto& [k, v] : p.values()) obj[k] = v;
  return obj;
}

ordered_json state_object(const SteadyState& s) {
  ordered_json obj;
  obj["x"] = vec_array(s.x);
  obj["eigenvalues"] = complex_array(s.eigenvalues);
  obj["stability"] = s.stability;
  obj["positivity"] = to_string(s.positivity);
  obj["residual"] = s.residual;
  obj["infected_mass"] = s.infected_mass;
  return obj;
}

ordered_json coeffs_object(const CenterCoefficients& c) {
  ordered_json obj;
  obj["alpha1"] = c.alpha1;
  obj["alpha2"] = c.alpha2;
  obj["a"] = c.a;
  obj["b"] = c.b;
  obj["c"] = c.c;
  obj["d"] = c.d;
  obj["e"] = c.e;
  obj["fuualpha1"] = c.fuualpha1;
  obj["fualpha2"] = c.fualpha2;
  obj["a_scale"] = c.a_scale;
  obj["tol_a"] = c.tol_a();
  obj["tol_e"] = c.tol_e();
  obj["a_is_zero"] = c.a_is_zero();
  obj["e_is_nonzero"] = c.e_is_nonzero();
  obj["c_kernel_sensitivity"] = c.c_kernel_sensitivity;
  obj["e_nonzero_sufficient"] = c.e_nonzero_sufficient;
  obj["d_corrected"] = c.d_corrected;
  obj["fuualpha1_corrected"] = c.fuualpha1_corrected;
  obj["e_corrected"] = c.e_corrected;
  ordered_json null_obj;
  null_obj["v"] = vec_array(c.null.v);
  null_obj["w"] = vec_array(c.null.w);
  null_obj["residual_w"] = c.null.residual_w;
  null_obj["residual_v"] = c.null.residual_v;
  obj["null_pair"] = null_obj;
  return obj;
}

}  // namespace

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) +
                       " is not of the form key=value: '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = line.substr(eq + 1);
    if (key.empty())
      throw UsageError("config line " + std::to_string(lineno) + " has an empty key");
    if (key == "model") {
      cfg.model_id = trim(value);
      continue;
    }
    cfg.params.set(key, parse_double(value, key));
  }
  return cfg;
}

std::string to_json(const R0Report& report) {
  ordered_json j;
  j["schema"] = "r0/1";
  j["r0"] = report.r0;
  j["F"] = mat_array(report.F);
  j["V"] = mat_array(report.V);
  j["dfe_eigenvalues"] = complex_array(report.dfe_eigenvalues);
  j["dfe_stability"] = to_string(report.dfe_stability);
  return j.dump(2);
}

std::string to_json(const CenterCoefficients& coeffs, const BifClass& cls) {
  ordered_json j;
  j["schema"] = "coeffs/1";
  j["coefficients"] = coeffs_object(coeffs);
  ordered_json cj;
  cj["primary"] = cls.primary;
  cj["flags"] = cls.flags;
  cj["a_zero"] = cls.a_zero;
  j["classification"] = cj;
  return j.dump(2);
}

std::string to_json(const RecipeReport& report) {
  ordered_json j;
  j["schema"] = "recipe/1";
  j["recipe"] = report.recipe;
  j["pass"] = report.pass;
  j["params"] = params_object(report.params);
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.checks) {
    ordered_json cj;
    cj["name"] = c.name;
    cj["target"] = c.target;
    cj["achieved"] = c.achieved;
    cj["pass"] = c.pass;
    if (!c.note.empty()) cj["note"] = c.note;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  j["perturbed"] =
      report.perturbed ? params_object(*report.perturbed) : ordered_json();
  ordered_json states = ordered_json::array();
  for (const auto& s : report.perturbed_states) states.push_back(state_object(s));
  j["perturbed_states"] = states;
  j["coeffs"] = report.coeffs ? coeffs_object(*report.coeffs) : ordered_json();
  j["log"] = report.log;
  return j.dump(2);
}

std::string to_json(const std::vector<SteadyState>& states) {
  ordered_json j;
  j["schema"] = "states/1";
  ordered_json arr = ordered_json::array();
  for (const auto& s : states) arr.push_back(state_object(s));
  j["states"] = arr;
  return j.dump(2);
}

}  // namespace bifurcat
