#pragma once

#include <iosfwd>
#include <string>

#include "bifurcat/bifcoeffs.hpp"
#include "bifurcat/continuation.hpp"
#include "bifurcat/ngm.hpp"
#include "bifurcat/recipes.hpp"

namespace bifurcat {

// Flat key=value configuration files ('#' comments, blank lines ignored).
// Unknown keys are the caller's concern; values must parse as doubles except
// for the reserved key "model".
struct Config {
  std::string model_id;
  ParamMap params;
};
Config load_config(const std::string& path);

// JSON serialization (deterministic member order, shortest-roundtrip
// doubles). Every document carries {"schema": "<kind>/1"}.
std::string to_json(const R0Report& report);
std::string to_json(const CenterCoefficients& coeffs, const BifClass& cls);
std::string to_json(const RecipeReport& report);
std::string to_json(const std::vector<SteadyState>& states);

}  // namespace bifurcat
