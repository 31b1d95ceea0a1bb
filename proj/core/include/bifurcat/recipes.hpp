#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bifurcat/bifcoeffs.hpp"
#include "bifurcat/continuation.hpp"
#include "bifurcat/steadystate.hpp"

namespace bifurcat {

struct CheckItem {
  std::string name;
  double target = 0.0;
  double achieved = 0.0;
  bool pass = false;
  std::string note;
};

// Outcome of a constructive scenario: the parameters found, every condition
// checked with its achieved value, and the derived objects. A failed
// construction is a report, not an exception.
struct RecipeReport {
  std::string recipe;
  ParamMap params;                 // base parameter set
  std::vector<CheckItem> checks;
  bool pass = false;
  std::optional<ParamMap> perturbed;   // two-state demonstration point
  std::vector<SteadyState> perturbed_states;
  std::optional<CenterCoefficients> coeffs;
  std::string log;                 // staged-search narrative

  const CheckItem* find(const std::string& name) const;
  void add(const std::string& name, double target, double achieved, bool pass,
           const std::string& note = "");
};

// Sign expression for the two-dimensional staged-protection model: negative
// exactly when the bifurcation at R0 = 1 is backward. (Quadratic in
// sigma * phi with positive leading and constant terms.)
double brauer_backward_test(const ParamMap& params);

// Sign expression for the cholera model at R0 = 1: its sign equals the sign
// of the quadratic's middle coefficient, and hence of coefficient a.
double martcheva_a1_sign(const ParamMap& params);

// Closed-form eta that places martcheva5d exactly at R0 = 1.
double martcheva_eta_for_r0(const ParamMap& params);

// Constructs a cholera-model parameter set with R0 = 1, a = 0, c < 0 and
// e != 0 (alpha1 = eta, alpha2 = D), then demonstrates two coexisting
// positive steady states (one stable, one unstable) at R0 < 1. The
// D-perturbation is attempted first; it is detected as degenerate (a D-change
// is conjugate to an eta-change, so it never opens a fold) and the
// demonstration falls back to perturbing the waning rate w.
RecipeReport theorem2_construct();

// F = (b+c) r_I p0 / (a11 T_max) - c; positive F makes the bifurcation at
// R0 = 1 backward once rho is enlarged per the delta relation, negative F
// forward.
double hepc_F(const ParamMap& params);

// delta achieving R0 = 1 exactly; infeasible (nullopt) when p0 > T_max.
std::optional<double> hepc_delta_for_r0(const ParamMap& params);

// r_I achieving a = 0; infeasible (nullopt) when the denominator
// (b+c)((b+c)(a12-a11) + b rho R*) is not positive.
std::optional<double> hepc_rI_for_a0(const ParamMap& params);

// Constructs a hepc3d parameter set with R0 = 1, a = 0, c < 0, e != 0 and
// fuualpha1 = 0 (alpha1 = rho, alpha2 = r_I), then perturbs r_I to exhibit
// R0 < 1 with exactly two positive steady states and a single fold under
// continuation.
RecipeReport theorem4_construct();

// Verifies the one-parameter family of steady states of the truncated model
// at delta = b rho R*/(b+c), r_I = c r_T/(b+c): residuals on an X grid, the
// quadratic/cubic coefficient split c2 = -c3, and coeff_c ~ 0.
RecipeReport truncated_continuum_verify(const ParamMap& params, int x_grid_size = 50);

enum class TruncatedRootClass { unique_positive, none, continuum };

std::string to_string(TruncatedRootClass c);

// Steady-state classification of the truncated model through the linear
// equation A X = B in X = T/(T+I): same nonzero signs -> unique positive
// solution; opposite signs (or exactly one zero) -> none; A = B = 0 ->
// continuum.
struct TruncatedRootReport {
  double A = 0.0;
  double B = 0.0;
  TruncatedRootClass cls = TruncatedRootClass::none;
  int enumerated_positive = 0;
  bool consistent = false;  // classification matches enumeration
};
TruncatedRootReport truncated_unique_root(const ParamMap& params);

}  // namespace bifurcat
