#pragma once

#include <string>
#include <vector>

#include "bifurcat/model.hpp"

namespace bifurcat {

// Left/right kernel vectors of the DFE Jacobian at the bifurcation point,
// normalized so that the largest infected component of w equals one and
// v . w = 1.
struct NullPair {
  Vec v;  // left null vector (row)
  Vec w;  // right null vector
  Mat A;  // Jacobian at the bifurcation point
  double residual_w = 0.0;  // ||A w||_inf
  double residual_v = 0.0;  // ||v^T A||_inf
};

// The scalar coefficients of the reduced bifurcation equation at a
// transcritical point, together with everything needed to interpret them.
struct CenterCoefficients {
  double a = 0.0;  // 1/2 v . d2f(w, w)
  double b = 0.0;  // v . d2f_param(w, alpha1)
  double c = 0.0;  // 1/3 v . d3f(w,w,w) - v . d2f(z, w), A z = d2f(w, w)
  double d = 0.0;  // v . d3f_param(w, w, alpha2)
  double e = 0.0;  // (-b d + fuualpha1 * fualpha2) / (2 b c)
  double fuualpha1 = 0.0;  // v . d3f_param(w, w, alpha1)
  double fualpha2 = 0.0;   // v . d2f_param(w, alpha2)
  std::string alpha1, alpha2;

  // Scale for deciding a ~ 0: half the total magnitude of the contraction
  // entries, sum_{i,j,k} |v_i w_j w_k H_ijk|, i.e. the positive plus negative
  // contraction mass before any cancellation.
  double a_scale = 0.0;
  // Absolute change of c under a fixed kernel-direction shift of the
  // pseudo-solve; small only when a ~ 0.
  double c_kernel_sensitivity = 0.0;
  // Sufficient condition for e != 0: fuualpha1 = 0 together with d != 0.
  bool e_nonzero_sufficient = false;

  // Second-order manifold-corrected counterparts (see fold_locus): these,
  // not the plain contractions, predict the measured fold-locus slopes.
  double d_corrected = 0.0;
  double fuualpha1_corrected = 0.0;
  double e_corrected = 0.0;

  NullPair null;

  double tol_a() const { return 1e-7 * a_scale; }
  bool a_is_zero() const { return std::abs(a) <= tol_a(); }
  double tol_e() const;
  bool e_is_nonzero() const { return std::abs(e) > tol_e(); }
};

// Bifurcation classification at R0 = 1. When a = 0 within tolerance the
// classifier reports every applicable flag, not a single label.
struct BifClass {
  std::string primary;  // forward | backward | unfolded-forward |
                        // unfolded-backward | degenerate
  std::vector<std::string> flags;
  bool a_zero = false;
};

// Computes the null pair at the DFE. Preconditions: the Jacobian has a simple
// eigenvalue of smallest modulus with |lambda| <= 1e-6 * scale. Errors:
// "non-simple zero eigenvalue" when the kernel is not one-dimensional, or a
// spectral-gap message when no near-zero eigenvalue exists.
NullPair null_pair(const ModelSystem& model, const ParamMap& params);

double coeff_a(const ModelSystem& model, const ParamMap& params);
double coeff_b(const ModelSystem& model, const ParamMap& params, const std::string& alpha1);
double coeff_c(const ModelSystem& model, const ParamMap& params);
double coeff_d(const ModelSystem& model, const ParamMap& params, const std::string& alpha2);
// Requires |c| above its degeneracy tolerance; throws NumericsError otherwise.
double coeff_e(const ModelSystem& model, const ParamMap& params,
               const std::string& alpha1, const std::string& alpha2);

// Full pipeline: null pair, then a, b, c, d, e and the corrected diagnostics.
// alpha2 may be empty, in which case d, e and their dependents are left zero.
CenterCoefficients coefficients(const ModelSystem& model, const ParamMap& params,
                                const std::string& alpha1, const std::string& alpha2);

BifClass classify(const CenterCoefficients& coeffs);

// c with an explicit kernel shift tau * w added to the pseudo-solve solution;
// used by invariance tests.
double coeff_c_shifted(const ModelSystem& model, const ParamMap& params, double tau);

}  // namespace bifurcat
