#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bifurcat/steadystate.hpp"

namespace bifurcat {

struct BranchPoint {
  double s = 0.0;       // arclength
  double alpha1 = 0.0;  // continuation parameter value
  Vec x;
  double r0 = 0.0;
  double max_re_eig = 0.0;
  double tangent_alpha1 = 0.0;  // d alpha1 / ds along the branch
  bool fold_flag = false;
  std::string stability;
};

struct FoldPoint {
  double alpha1 = 0.0;
  Vec x;
  Vec tangent;          // state-space tangent at the fold
  double max_re_other = 0.0;  // largest real part among the non-critical eigenvalues
};

struct Branch {
  std::string model_id;
  std::string alpha1;
  std::vector<std::string> state_names;
  ParamMap fixed_params;  // all parameters; alpha1's entry is the start value
  std::vector<BranchPoint> points;
  std::string termination;  // range-exit | positivity-exit | max-steps | corrector-failure
};

struct TraceOptions {
  double alpha1_min = -std::numeric_limits<double>::infinity();
  double alpha1_max = std::numeric_limits<double>::infinity();
  int max_steps = 10000;
  bool stop_at_negative = true;  // terminate when a state component leaves [0, inf)
  double initial_step = 0.0;     // 0: auto
};

// Pseudo-arclength predictor-corrector continuation of a steady-state branch
// against one parameter. Adaptive step within [1e-6, 1e-1] * scale: halved
// when the corrector needs more than 8 iterations, grown by 1.3 when it needs
// at most 3. Fold markers are placed where the alpha1-tangent changes sign
// and the bordered Jacobian remains full-rank (which excludes transcritical
// crossings, where the parameter column vanishes).
Branch trace(const ModelSystem& model, const ParamMap& params, const std::string& alpha1,
             const SteadyState& start, int direction, const TraceOptions& opts = {});

// Refines every marked fold with the augmented system
//   f(x, alpha1) = 0,  J(x, alpha1) w = 0,  ||w||^2 = 1
// solved by Newton from the bracketing samples.
std::vector<FoldPoint> fold_points(const ModelSystem& model, const Branch& branch);

// One-shot fold refinement from an initial guess.
std::optional<FoldPoint> refine_fold(const ModelSystem& model, const ParamMap& params,
                                     const std::string& alpha1, const Vec& x_guess,
                                     double alpha1_guess);

struct FoldLocusPoint {
  double alpha2_offset = 0.0;
  double alpha1_fold = 0.0;
  double u_fold = 0.0;           // v . (x_fold - x0), the fold's chart coordinate
  double u_threshold_root = 0.0; // nontrivial-root coordinate at alpha1 = threshold
  bool found = false;
};

struct FoldLocusReport {
  std::vector<FoldLocusPoint> points;
  // Measured finite-difference slopes at alpha2-offset -> 0.
  double slope_u_fold = 0.0;           // d u_fold / d alpha2
  double slope_u_threshold = 0.0;      // d u_threshold_root / d alpha2
  double slope_alpha1_threshold = 0.0; // d alpha1(R0=1) / d alpha2
  // Predictions from the coefficient pipeline.
  double pred_two_e = 0.0;             // 2 e (plain contractions)
  double pred_two_e_corrected = 0.0;   // 2 e (manifold-corrected)
  double pred_alpha1_slope = 0.0;      // -fualpha2 / b
  bool degenerate = false;             // no fold detected on either side
  std::string note;
};

// Measures how the fold created by an alpha2-perturbation moves, by marching
// the branch in the chart coordinate u = v . (x - x0) at several alpha2
// offsets and fitting the parabola vertex and the threshold-root crossing.
FoldLocusReport fold_locus(const ModelSystem& model, const ParamMap& params,
                           const std::string& alpha1, const std::string& alpha2,
                           double range);

// Deterministic exports. CSV columns:
//   s, alpha1, <state names...>, r0, max_re_eig, fold_flag
void export_csv(const Branch& branch, std::ostream& os);
void export_json(const Branch& branch, std::ostream& os);

}  // namespace bifurcat
