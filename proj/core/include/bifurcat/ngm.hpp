#pragma once

#include <string>

#include "bifurcat/model.hpp"

namespace bifurcat {

enum class Stability { stable, unstable, marginal };

std::string to_string(Stability s);

struct R0Report {
  double r0 = 0.0;
  Mat F;                  // new-infection Jacobian, infected block, at the DFE
  Mat V;                  // transition Jacobian, infected block, at the DFE
  CVec dfe_eigenvalues;   // spectrum of the full Jacobian at the DFE
  Stability dfe_stability = Stability::marginal;
};

// Basic reproductive ratio as the spectral radius of F * V^-1, with F and V
// the infected-block Jacobians of the model's new-infection/transition split
// at the DFE. Throws NumericsError if V is singular, ModelError if the model
// has no fv_split.
R0Report r0(const ModelSystem& model, const ParamMap& params);

// Classification of the DFE by the maximum real part of the full-Jacobian
// spectrum; marginal when |max Re| <= 1e-8 * (1 + ||J||_inf).
Stability dfe_stability(const ModelSystem& model, const ParamMap& params);

// Marginality tolerance shared by stability classifications.
double spectral_margin(const Mat& J);

// Solves r0(params with alpha1 = t) = 1 for t by bracketing + bisection with
// secant polish, starting from the current alpha1 value. Throws NumericsError
// when no sign change is found over a wide multiplicative search.
double alpha1_at_threshold(const ModelSystem& model, const ParamMap& params,
                           const std::string& alpha1);

}  // namespace bifurcat
