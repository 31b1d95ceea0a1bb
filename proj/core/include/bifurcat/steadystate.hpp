#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bifurcat/model.hpp"
#include "bifurcat/ngm.hpp"

namespace bifurcat {

enum class Positivity { positive, boundary, infeasible };

std::string to_string(Positivity p);

struct SteadyState {
  Vec x;
  CVec eigenvalues;
  std::string stability;  // stable | unstable | nonhyperbolic
  Positivity positivity = Positivity::boundary;
  double residual = 0.0;        // ||f(x)||_inf
  double infected_mass = 0.0;   // sum of infected components (sort key)
};

// A model-specific polynomial whose admissible roots are in one-to-one
// correspondence with steady states. Coefficients are ascending:
// coeffs[k] multiplies z^k.
struct PolyReduction {
  std::vector<double> coeffs;
  // Maps an admissible root to a full state vector; nullopt when the root is
  // out of the feasible range.
  std::function<std::optional<Vec>(double)> back_map;
  // All real roots (no feasibility filter).
  std::vector<double> real_roots() const;
  // States back-mapped from feasible real roots.
  std::vector<Vec> states() const;
};

// All real roots (ascending) of an ascending-coefficient polynomial via the
// companion matrix; leading near-zero coefficients are trimmed.
std::vector<double> poly_real_roots(const std::vector<double>& ascending);

// Multi-start Newton enumeration: seeds from the DFE, the model's polynomial
// reduction (builtin models), and a 5^n grid over the positivity box.
// Deterministic output: sorted by infected mass, deduplicated at
// 1e-6 * scale.
std::vector<SteadyState> enumerate_states(const ModelSystem& model, const ParamMap& params);

// Classifies an already-known steady state (eigenvalues, stability label,
// positivity) without searching.
SteadyState classify_state(const ModelSystem& model, const ParamMap& params, const Vec& x);

// Damped Newton on f(x) = 0 from a given seed; returns nullopt on
// non-convergence.
std::optional<Vec> newton_solve(const ModelSystem& model, const ParamMap& params,
                                const Vec& seed, int max_iter = 60);

// Quadratic reduction of the two-dimensional staged-protection model in the
// infected variable I: a2 I^2 + a1 I + a0 with a2 = sigma beta^2, and
// V recovered from I. sigma = 0 degenerates to a linear equation (handled).
PolyReduction brauer_quadratic(const ParamMap& params);

// Cubic reduction of hepc3d in X = T / (T + I) on (0, 1); the back-map first
// reconstructs the total P = T + I and from it T, I, V. For the truncated
// model the cubic factors as X * (quadratic).
PolyReduction hepc_X_reduction(const ParamMap& params);

// Quadratic reduction of martcheva5d in u = beta B / (B + D) on (0, beta).
PolyReduction martcheva_quadratic(const ParamMap& params);

// The martcheva quadratic's coefficients are affine in eta:
// q(u) = eta * A(u) + B(u) (ascending arrays). The fold locus in eta is
// therefore available in closed form through the discriminant.
struct MartQuadSplit {
  std::array<double, 3> A;
  std::array<double, 3> B;
};
MartQuadSplit martcheva_quadratic_eta_split(const ParamMap& params);

// Fold of the positive-branch root structure in eta: solves
// discriminant(eta) = 0 and returns (eta_fold, u_fold) for the root closest
// to eta_ref; nullopt when no real fold exists.
std::optional<std::pair<double, double>> martcheva_eta_fold(const ParamMap& params,
                                                            double eta_ref);

struct ParityAudit {
  int count = 0;        // positive steady states (from the reduction)
  bool parity_ok = false;
  bool abstained = false;
  std::string reason;
  double r0 = 0.0;
  // hepc3d feasibility record: rho R* + r_I - delta (positive whenever a
  // positive steady state exists).
  double hepc_feasibility = 0.0;
};

// Checks that the number of positive steady states is even for R0 < 1 and odd
// for R0 > 1. Abstains near folds (root separation <= 1e-4 * scale), near the
// threshold (|R0 - 1| < 1e-6), and for near-boundary roots.
ParityAudit parity_audit(const ModelSystem& model, const ParamMap& params);

}  // namespace bifurcat
