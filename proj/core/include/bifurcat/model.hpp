#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bifurcat/common.hpp"

namespace bifurcat {

// Named parameter values. Keys are kept sorted (std::map) so that every
// iteration order — and hence every serialized output — is deterministic.
class ParamMap {
public:
  ParamMap() = default;
  explicit ParamMap(std::map<std::string, double> values) : values_(std::move(values)) {}

  double at(const std::string& name) const;
  bool has(const std::string& name) const { return values_.count(name) != 0; }
  void set(const std::string& name, double value) { values_[name] = value; }
  const std::map<std::string, double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  // Largest absolute value; used for residual scales.
  double max_abs() const;

  ParamMap with(const std::string& name, double value) const {
    ParamMap out = *this;
    out.set(name, value);
    return out;
  }

private:
  std::map<std::string, double> values_;
};

// New-infection / transition split of the rhs restricted to the infected
// variables: rhs_infected = gain - loss at every state.
struct FvSplit {
  std::function<Vec(const Vec& x, const ParamMap&)> gain;  // F_i, dimension m
  std::function<Vec(const Vec& x, const ParamMap&)> loss;  // V_i, dimension m
};

// A parameterized ODE vector field with designated infected variables and a
// disease-free equilibrium (DFE) provider. Immutable after construction; all
// members are safe for concurrent read-only use.
struct ModelSystem {
  std::string id;
  int n = 0;  // state dimension
  std::vector<std::string> state_names;
  std::vector<int> infected_idx;            // indices into the state vector
  std::vector<std::string> param_names;     // required parameter names
  std::function<Vec(const Vec& x, const ParamMap&)> rhs;
  std::function<Vec(const ParamMap&)> dfe;
  // Returns true if admissible; otherwise false with a reason.
  std::function<bool(const ParamMap&, std::string* reason)> admissible;
  std::optional<FvSplit> fv_split;

  void require_admissible(const ParamMap& params) const;
  Vec eval(const Vec& x, const ParamMap& params) const;
  int num_infected() const { return static_cast<int>(infected_idx.size()); }
};

// Built-in catalog. Ids: brauer2d, brauer3d, martcheva5d, hepc3d,
// hepc3d_truncated. Throws UsageError for unknown ids.
const ModelSystem& builtin_model(const std::string& id);
std::vector<std::string> builtin_model_ids();

// The in-host hepatitis-type model; `truncated` forces s = d = 0 regardless of
// the supplied parameter values.
ModelSystem make_hepc3d(bool truncated);

struct HepcDfeQuantities {
  double p0, a11, a12, a22;
};

// Closed-form DFE quantities of the hepc3d model. Guarantees p0 > 0 and
// 0 < a12 < a11 whenever s > 0.
HepcDfeQuantities hepc_dfe_quantities(const ParamMap& params);

}  // namespace bifurcat
