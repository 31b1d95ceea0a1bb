#include "bifurcat/model.hpp"

#include <cmath>
#include <sstream>

namespace bifurcat {

double ParamMap::at(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw ModelError("unknown parameter: " + name);
  return it->second;
}

double ParamMap::max_abs() const {
  double m = 0.0;
  for (const auto& [k, v] : values_) m = std::max(m, std::abs(v));
  return m;
}

void ModelSystem::require_admissible(const ParamMap& params) const {
  for (const auto& name : param_names) {
    if (!params.has(name))
      throw ModelError(id + ": missing parameter: " + name);
  }
  std::string reason;
  if (admissible && !admissible(params, &reason))
    throw ModelError(id + ": inadmissible parameters: " + reason);
}

Vec ModelSystem::eval(const Vec& x, const ParamMap& params) const {
  if (x.size() != n) {
    std::ostringstream msg;
    msg << id << ": state dimension " << x.size() << ", expected " << n;
    throw ModelError(msg.str());
  }
  require_admissible(params);
  return rhs(x, params);
}

namespace {

bool positive_params(const ParamMap& p, const std::vector<std::string>& names,
                     std::string* reason) {
  for (const auto& name : names) {
    if (!(p.at(name) > 0.0)) {
      if (reason) *reason = name + " must be positive";
      return false;
    }
  }
  return true;
}

bool sigma_in_unit(const ParamMap& p, std::string* reason) {
  double s = p.at("sigma");
  if (s < 0.0 || s > 1.0) {
    if (reason) *reason = "sigma must lie in [0, 1]";
    return false;
  }
  return true;
}

// --- staged-protection models -------------------------------------------

// Two-dimensional reduced system in (I, V) on the invariant simplex
// S = K - I - V:
//   I' = beta (K - I - V) I + sigma beta V I - (mu + gamma) I
//   V' = phi (K - I - V) - sigma beta V I - (mu + theta) V
ModelSystem make_brauer2d() {
  ModelSystem m;
  m.id = "brauer2d";
  m.n = 2;
  m.state_names = {"I", "V"};
  m.infected_idx = {0};
  m.param_names = {"K", "beta", "gamma", "mu", "phi", "sigma", "theta"};
  m.rhs = [](const Vec& x, const ParamMap& p) {
    const double I = x[0], V = x[1];
    const double beta = p.at("beta"), K = p.at("K"), mu = p.at("mu");
    const double gamma = p.at("gamma"), sigma = p.at("sigma");
    const double phi = p.at("phi"), theta = p.at("theta");
    Vec f(2);
    f[0] = beta * (K - I - V) * I + sigma * beta * V * I - (mu + gamma) * I;
    f[1] = phi * (K - I - V) - sigma * beta * V * I - (mu + theta) * V;
    return f;
  };
  m.dfe = [](const ParamMap& p) {
    Vec x0(2);
    x0[0] = 0.0;
    x0[1] = p.at("phi") * p.at("K") / (p.at("mu") + p.at("theta") + p.at("phi"));
    return x0;
  };
  m.admissible = [](const ParamMap& p, std::string* reason) {
    return positive_params(p, {"K", "beta", "gamma", "mu", "phi", "theta"}, reason) &&
           sigma_in_unit(p, reason);
  };
  m.fv_split = FvSplit{
      [](const Vec& x, const ParamMap& p) {
        const double I = x[0], V = x[1];
        const double beta = p.at("beta"), K = p.at("K"), sigma = p.at("sigma");
        Vec g(1);
        g[0] = beta * (K - I - V) * I + sigma * beta * V * I;
        return g;
      },
      [](const Vec& x, const ParamMap& p) {
        Vec l(1);
        l[0] = (p.at("mu") + p.at("gamma")) * x[0];
        return l;
      }};
  return m;
}

//   S' = Lambda - beta S I - (mu + phi) S + gamma I + theta V
//   I' = beta S I + sigma beta V I - (mu + gamma) I
//   V' = phi S - sigma beta V I - (mu + theta) V
ModelSystem make_brauer3d() {
  ModelSystem m;
  m.id = "brauer3d";
  m.n = 3;
  m.state_names = {"S", "I", "V"};
  m.infected_idx = {1};
  m.param_names = {"Lambda", "beta", "gamma", "mu", "phi", "sigma", "theta"};
  m.rhs = [](const Vec& x, const ParamMap& p) {
    const double S = x[0], I = x[1], V = x[2];
    const double Lambda = p.at("Lambda"), beta = p.at("beta"), mu = p.at("mu");
    const double gamma = p.at("gamma"), sigma = p.at("sigma");
    const double phi = p.at("phi"), theta = p.at("theta");
    Vec f(3);
    f[0] = Lambda - beta * S * I - (mu + phi) * S + gamma * I + theta * V;
    f[1] = beta * S * I + sigma * beta * V * I - (mu + gamma) * I;
    f[2] = phi * S - sigma * beta * V * I - (mu + theta) * V;
    return f;
  };
  m.dfe = [](const ParamMap& p) {
    const double Lambda = p.at("Lambda"), mu = p.at("mu");
    const double phi = p.at("phi"), theta = p.at("theta");
    const double den = mu * (mu + phi + theta);
    Vec x0(3);
    x0[0] = (mu + theta) * Lambda / den;
    x0[1] = 0.0;
    x0[2] = phi * Lambda / den;
    return x0;
  };
  m.admissible = [](const ParamMap& p, std::string* reason) {
    return positive_params(p, {"Lambda", "beta", "gamma", "mu", "phi", "theta"}, reason) &&
           sigma_in_unit(p, reason);
  };
  m.fv_split = FvSplit{
      [](const Vec& x, const ParamMap& p) {
        const double S = x[0], I = x[1], V = x[2];
        Vec g(1);
        g[0] = p.at("beta") * S * I + p.at("sigma") * p.at("beta") * V * I;
        return g;
      },
      [](const Vec& x, const ParamMap& p) {
        Vec l(1);
        l[0] = (p.at("mu") + p.at("gamma")) * x[1];
        return l;
      }};
  return m;
}

// --- cholera-with-vaccination model --------------------------------------

//   S' = Lambda - beta S B/(B+D) - (mu + psi) S + w R
//   V' = psi S - sigma beta V B/(B+D) - mu V
//   I' = beta (S + sigma V) B/(B+D) - (mu + gamma) I
//   R' = gamma I - (mu + w) R
//   B' = eta I - delta B
ModelSystem make_martcheva5d() {
  ModelSystem m;
  m.id = "martcheva5d";
  m.n = 5;
  m.state_names = {"S", "V", "I", "R", "B"};
  m.infected_idx = {2, 4};
  m.param_names = {"D",     "Lambda", "beta", "delta", "eta",
                   "gamma", "mu",     "psi",  "sigma", "w"};
  m.rhs = [](const Vec& x, const ParamMap& p) {
    const double S = x[0], V = x[1], I = x[2], R = x[3], B = x[4];
    const double Lambda = p.at("Lambda"), beta = p.at("beta"), D = p.at("D");
    const double mu = p.at("mu"), psi = p.at("psi"), w = p.at("w");
    const double sigma = p.at("sigma"), gamma = p.at("gamma");
    const double eta = p.at("eta"), delta = p.at("delta");
    const double foi = beta * B / (B + D);
    Vec f(5);
    f[0] = Lambda - foi * S - (mu + psi) * S + w * R;
    f[1] = psi * S - sigma * foi * V - mu * V;
    f[2] = foi * S + sigma * foi * V - (mu + gamma) * I;
    f[3] = gamma * I - (mu + w) * R;
    f[4] = eta * I - delta * B;
    return f;
  };
  m.dfe = [](const ParamMap& p) {
    const double Lambda = p.at("Lambda"), mu = p.at("mu"), psi = p.at("psi");
    Vec x0(5);
    x0[0] = Lambda / (mu + psi);
    x0[1] = Lambda * psi / (mu * (mu + psi));
    x0[2] = 0.0;
    x0[3] = 0.0;
    x0[4] = 0.0;
    return x0;
  };
  m.admissible = [](const ParamMap& p, std::string* reason) {
    return positive_params(
               p, {"D", "Lambda", "beta", "delta", "eta", "gamma", "mu", "psi", "w"},
               reason) &&
           sigma_in_unit(p, reason);
  };
  m.fv_split = FvSplit{
      [](const Vec& x, const ParamMap& p) {
        const double S = x[0], V = x[1], B = x[4];
        const double foi = p.at("beta") * B / (B + p.at("D"));
        Vec g(2);
        g[0] = foi * S + p.at("sigma") * foi * V;
        g[1] = 0.0;
        return g;
      },
      [](const Vec& x, const ParamMap& p) {
        const double I = x[2], B = x[4];
        Vec l(2);
        l[0] = (p.at("mu") + p.at("gamma")) * I;
        l[1] = p.at("delta") * B - p.at("eta") * I;
        return l;
      }};
  return m;
}

}  // namespace

// --- in-host hepatitis-type model ----------------------------------------

//   T' = s + r_T T (1 - (T+I)/T_max) - d T - b T V/(T+I)
//   I' = r_I I (1 - (T+I)/T_max) + b T V/(T+I) - delta I
//   V' = rho R* I - c V - b T V/(T+I)
ModelSystem make_hepc3d(bool truncated) {
  ModelSystem m;
  m.id = truncated ? "hepc3d_truncated" : "hepc3d";
  m.n = 3;
  m.state_names = {"T", "I", "V"};
  m.infected_idx = {1, 2};
  m.param_names = {"R_star", "T_max", "b", "c", "d", "delta", "r_I", "r_T", "rho", "s"};
  m.rhs = [truncated](const Vec& x, const ParamMap& p) {
    const double T = x[0], I = x[1], V = x[2];
    const double s = truncated ? 0.0 : p.at("s");
    const double d = truncated ? 0.0 : p.at("d");
    const double r_T = p.at("r_T"), T_max = p.at("T_max"), b = p.at("b");
    const double c = p.at("c"), delta = p.at("delta"), rho = p.at("rho");
    const double R_star = p.at("R_star"), r_I = p.at("r_I");
    const double P = T + I;
    if (!(P > 1e-300))
      throw ModelError("hepc3d: incidence denominator T + I is not positive");
    const double inc = b * T * V / P;
    Vec f(3);
    f[0] = s + r_T * T * (1.0 - P / T_max) - d * T - inc;
    f[1] = r_I * I * (1.0 - P / T_max) + inc - delta * I;
    f[2] = rho * R_star * I - c * V - inc;
    return f;
  };
  m.dfe = [truncated](const ParamMap& p) {
    const double s = truncated ? 0.0 : p.at("s");
    const double d = truncated ? 0.0 : p.at("d");
    const double r_T = p.at("r_T"), T_max = p.at("T_max");
    const double a11 = std::sqrt((r_T - d) * (r_T - d) + 4.0 * s * r_T / T_max);
    Vec x0(3);
    x0[0] = (r_T - d + a11) * T_max / (2.0 * r_T);
    x0[1] = 0.0;
    x0[2] = 0.0;
    return x0;
  };
  m.admissible = [](const ParamMap& p, std::string* reason) {
    if (!positive_params(p, {"R_star", "T_max", "b", "c", "delta", "r_I", "r_T", "rho"},
                         reason))
      return false;
    if (p.at("s") < 0.0 || p.at("d") < 0.0) {
      if (reason) *reason = "s and d must be non-negative";
      return false;
    }
    return true;
  };
  m.fv_split = FvSplit{
      [](const Vec& x, const ParamMap& p) {
        const double T = x[0], I = x[1], V = x[2];
        const double P = T + I;
        if (!(P > 1e-300))
          throw ModelError("hepc3d: incidence denominator T + I is not positive");
        Vec g(2);
        g[0] = p.at("b") * T * V / P;
        g[1] = 0.0;
        return g;
      },
      [](const Vec& x, const ParamMap& p) {
        const double T = x[0], I = x[1], V = x[2];
        const double P = T + I;
        const double inc = p.at("b") * T * V / P;
        Vec l(2);
        l[0] = p.at("delta") * I - p.at("r_I") * I * (1.0 - P / p.at("T_max"));
        l[1] = p.at("c") * V + inc - p.at("rho") * p.at("R_star") * I;
        return l;
      }};
  return m;
}

HepcDfeQuantities hepc_dfe_quantities(const ParamMap& params) {
  const double s = params.at("s"), d = params.at("d");
  const double r_T = params.at("r_T"), T_max = params.at("T_max");
  const double r_I = params.at("r_I"), delta = params.at("delta");
  if (!(r_T > 0.0) || !(T_max > 0.0))
    throw ModelError("hepc3d: r_T and T_max must be positive");
  HepcDfeQuantities q;
  q.a11 = std::sqrt((r_T - d) * (r_T - d) + 4.0 * s * r_T / T_max);
  q.p0 = (r_T - d + q.a11) * T_max / (2.0 * r_T);
  q.a12 = q.p0 * r_T / T_max;
  q.a22 = -(delta + r_I * (q.p0 / T_max - 1.0));
  return q;
}

const ModelSystem& builtin_model(const std::string& id) {
  static const ModelSystem brauer2d = make_brauer2d();
  static const ModelSystem brauer3d = make_brauer3d();
  static const ModelSystem martcheva5d = make_martcheva5d();
  static const ModelSystem hepc3d = make_hepc3d(false);
  static const ModelSystem hepc3d_truncated = make_hepc3d(true);
  if (id == "brauer2d") return brauer2d;
  if (id == "brauer3d") return brauer3d;
  if (id == "martcheva5d") return martcheva5d;
  if (id == "hepc3d") return hepc3d;
  if (id == "hepc3d_truncated") return hepc3d_truncated;
  throw UsageError("unknown model: " + id);
}

std::vector<std::string> builtin_model_ids() {
  return {"brauer2d", "brauer3d", "martcheva5d", "hepc3d", "hepc3d_truncated"};
}

}  // namespace bifurcat
