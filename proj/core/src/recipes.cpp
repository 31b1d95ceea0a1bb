#include "bifurcat/recipes.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "bifurcat/ngm.hpp"
#include "bifurcat/numdiff.hpp"

namespace bifurcat {

const CheckItem* RecipeReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

void RecipeReport::add(const std::string& name, double target, double achieved,
                       bool pass_flag, const std::string& note) {
  checks.push_back(CheckItem{name, target, achieved, pass_flag, note});
}

namespace {

void finalize(RecipeReport& rep, std::ostringstream& log) {
  rep.log = log.str();
  rep.pass = !rep.checks.empty();
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
}

std::vector<SteadyState> positive_states(const std::vector<SteadyState>& all) {
  std::vector<SteadyState> out;
  for (const auto& s : all)
    if (s.positivity == Positivity::positive) out.push_back(s);
  return out;
}

// Appends the standard two-state demonstration checks: exactly two positive
// steady states, one stable / one unstable, R0 < 1.
void add_two_state_checks(RecipeReport& rep, const std::vector<SteadyState>& pos,
                          double r0_value) {
  int stable = 0, unstable = 0;
  std::ostringstream det;
  for (const auto& s : pos) {
    double max_re = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
      max_re = std::max(max_re, s.eigenvalues[i].real());
    det << " [infected mass " << s.infected_mass << ", max Re eig " << max_re
        << ", " << s.stability << "]";
    if (s.stability == "stable") ++stable;
    if (s.stability == "unstable") ++unstable;
  }
  rep.add("perturbed: exactly two positive steady states", 2.0,
          static_cast<double>(pos.size()), pos.size() == 2, det.str());
  rep.add("perturbed: one stable and one unstable state", 1.0,
          static_cast<double>(stable), stable == 1 && unstable == 1);
  rep.add("perturbed: R0 < 1", 1.0, r0_value, r0_value < 1.0);
}

// --- martcheva helpers -----------------------------------------------------

double mart_eta_star(const ParamMap& p) {
  const double Lambda = p.at("Lambda"), mu = p.at("mu"), psi = p.at("psi");
  const double S0 = Lambda / (mu + psi);
  const double V0 = Lambda * psi / (mu * (mu + psi));
  return p.at("D") * p.at("delta") * (mu + p.at("gamma")) /
         (p.at("beta") * (S0 + p.at("sigma") * V0));
}

struct WedgeProbe {
  bool window = false;      // a genuine fold strictly inside the parameter range
  double alpha1_cross = 0.0;
  double alpha1_fold = 0.0;
  double u_fold = 0.0;
  std::string why;
};

// For a perturbed cholera parameter set, locates the fold of the root
// structure in eta from the closed-form discriminant and reports whether a
// two-state window (fold strictly below the threshold, positive chart
// coordinate) exists.
WedgeProbe mart_probe(const ParamMap& pert) {
  WedgeProbe pr;
  pr.alpha1_cross = mart_eta_star(pert);
  const auto fold = martcheva_eta_fold(pert, pr.alpha1_cross);
  if (!fold) {
    pr.why = "no real discriminant root in eta";
    return pr;
  }
  pr.alpha1_fold = fold->first;
  pr.u_fold = fold->second;
  const double depth = std::abs(pr.alpha1_cross - pr.alpha1_fold) /
                       (1.0 + std::abs(pr.alpha1_cross));
  if (pr.u_fold <= 1e-8) {
    pr.why = "fold sits at a non-positive chart coordinate";
    return pr;
  }
  if (depth <= 1e-12) {
    pr.why = "fold coincides with the threshold (window of zero width)";
    return pr;
  }
  pr.window = true;
  return pr;
}

// --- hepc helpers ----------------------------------------------------------

double hepc_rho_cross(const ParamMap& p) {
  const auto q = hepc_dfe_quantities(p);
  return (p.at("b") + p.at("c")) *
         (p.at("delta") - p.at("r_I") * (1.0 - q.p0 / p.at("T_max"))) /
         (p.at("b") * p.at("R_star"));
}

int hepc_positive_count(const ParamMap& p) {
  int n = 0;
  for (const Vec& x : hepc_X_reduction(p).states()) {
    if (x.minCoeff() > 1e-9 * (1.0 + inf_norm(x))) ++n;
  }
  return n;
}

// Bisects rho on the positive-state count of the cubic reduction to locate
// the fold boundary of the two-state window below rho_cross. Returns nullopt
// when no window opens on this side.
std::optional<double> hepc_rho_fold(const ParamMap& pert, double rho_cross) {
  const auto count = [&](double rho) {
    return hepc_positive_count(pert.with("rho", rho));
  };
  if (count(rho_cross * (1.0 - 1e-9)) < 2) return std::nullopt;
  double g = 1e-9;
  while (g < 0.5 && count(rho_cross * (1.0 - 2.0 * g)) >= 2) g *= 2.0;
  if (g >= 0.5) return std::nullopt;  // window never closes: not a fold picture
  double lo = rho_cross * (1.0 - 2.0 * g);  // below the window
  double hi = rho_cross * (1.0 - g);        // inside the window
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (count(mid) >= 2 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Paper-normalization null vectors of the hepatitis model at the DFE and the
// conversion factor to the pipeline normalization (largest infected component
// of w equal to one, v.w = 1).
struct HepcNullScale {
  Vec v, w;
  double M = 0.0;   // largest infected component of w
  double vw = 0.0;  // v . w
};

HepcNullScale hepc_closed_null(const ParamMap& p) {
  const auto q = hepc_dfe_quantities(p);
  const double b = p.at("b"), c = p.at("c");
  const double mt = p.at("rho") * p.at("R_star");
  HepcNullScale ns;
  ns.v = Vec(3);
  ns.v << 0.0, b + c, b;
  ns.w = Vec(3);
  ns.w << -q.a12 * (b + c) - b * mt, q.a11 * (b + c), q.a11 * mt;
  ns.M = std::max(std::abs(ns.w[1]), std::abs(ns.w[2]));
  ns.vw = ns.v.dot(ns.w);
  return ns;
}

// c split into its third-order and second-order parts in the closed-form
// normalization: the cubic part from the closed form, the quadratic part
// measured with the solvability choice z = (z1, 0, z3).
struct CSplit {
  double c3 = 0.0;
  double c2 = 0.0;
};

CSplit hepc_c_split(const ModelSystem& m, const ParamMap& p, const Mat& A) {
  const auto q = hepc_dfe_quantities(p);
  const double b = p.at("b"), c = p.at("c"), T_max = p.at("T_max");
  const double mt = p.at("rho") * p.at("R_star");
  const auto ns = hepc_closed_null(p);
  CSplit out;
  out.c3 = 2.0 / (q.p0 * q.p0) * b * c * (b + c) * q.a11 * q.a11 * mt *
           ((q.a11 - q.a12) * (b + c) - b * mt);
  (void)T_max;
  const Vec x0 = m.dfe(p);
  const Vec y = d2f(m, x0, p, ns.w, ns.w);
  Eigen::Matrix2d A2;
  A2 << A(0, 0), A(0, 2), A(2, 0), A(2, 2);
  const Eigen::Vector2d rhs2(y[0], y[2]);
  const Eigen::Vector2d z13 = A2.lu().solve(rhs2);
  Vec z(3);
  z << z13[0], 0.0, z13[1];
  out.c2 = -ns.v.dot(d2f(m, x0, p, z, ns.w));
  return out;
}

}  // namespace

// --- sign expressions ------------------------------------------------------

double brauer_backward_test(const ParamMap& p) {
  const double sigma = p.at("sigma"), phi = p.at("phi"), mu = p.at("mu");
  const double gamma = p.at("gamma"), theta = p.at("theta");
  const double sp = sigma * phi;
  return sp * sp + sp * (-gamma + mu + 2.0 * theta + sigma * (gamma + mu)) +
         (mu + theta) * (mu + theta);
}

double martcheva_a1_sign(const ParamMap& p) {
  const double Lambda = p.at("Lambda"), mu = p.at("mu"), psi = p.at("psi");
  const double D = p.at("D"), delta = p.at("delta"), gamma = p.at("gamma");
  const double eta = p.at("eta"), sigma = p.at("sigma"), w = p.at("w");
  const double ms = mu + sigma * psi;
  return -Lambda * ms / (D * mu * (mu + psi)) -
         (delta * (mu + gamma) / (eta * ms)) * (psi * sigma * sigma / mu) +
         (delta / (eta * (mu + psi))) *
             (-mu - gamma + (w / (mu + w)) * gamma * ms / mu);
}

double martcheva_eta_for_r0(const ParamMap& p) { return mart_eta_star(p); }

// --- theorem 2 -------------------------------------------------------------

RecipeReport theorem2_construct() {
  RecipeReport rep;
  rep.recipe = "theorem2";
  std::ostringstream log;
  const ModelSystem& m = builtin_model("martcheva5d");

  // Stage 1: fix the slow rates, make gamma large and sigma small while
  // keeping sigma * psi at the value 2 mu (mu + w) / w that turns the
  // waning-path term positive, then look for a sign change of the quadratic
  // middle-coefficient expression along beta.
  const double mu = 0.1, w = 1.0, D = 10.0, delta = 1.5, Lambda = 1.0;
  int evals = 0;
  std::optional<ParamMap> base;
  for (double gamma : {50.0, 100.0, 200.0}) {
    for (double sigma : {0.02, 0.01, 0.005}) {
      const double psi = 2.0 * mu * (mu + w) / (sigma * w);
      ParamMap p(std::map<std::string, double>{
          {"Lambda", Lambda}, {"beta", 1.0}, {"D", D}, {"delta", delta},
          {"eta", 1.0}, {"gamma", gamma}, {"mu", mu}, {"psi", psi},
          {"sigma", sigma}, {"w", w}});
      const auto sign_at = [&](double beta) {
        ParamMap q = p.with("beta", beta);
        q.set("eta", mart_eta_star(q));
        ++evals;
        return martcheva_a1_sign(q);
      };
      // geometric grid scan for a bracket
      const int ngrid = 25;
      double lo = 0.0, hi = 0.0, slo = 0.0;
      bool bracket = false;
      double prev_b = 0.0, prev_s = 0.0;
      for (int i = 0; i < ngrid; ++i) {
        const double beta = 1e-2 * std::pow(1e4, i / double(ngrid - 1));
        const double s = sign_at(beta);
        if (i > 0 && std::signbit(s) != std::signbit(prev_s)) {
          lo = prev_b;
          hi = beta;
          slo = prev_s;
          bracket = true;
          break;
        }
        prev_b = beta;
        prev_s = s;
      }
      if (!bracket) {
        log << "gamma=" << gamma << " sigma=" << sigma
            << ": no sign change of the middle-coefficient expression over "
               "beta in [1e-2, 1e2]\n";
        continue;
      }
      // bisect the sign expression, then polish on the measured coefficient a
      for (int it = 0; it < 30; ++it) {
        const double mid = std::sqrt(lo * hi);
        const double s = sign_at(mid);
        (std::signbit(s) == std::signbit(slo) ? lo : hi) = mid;
      }
      const auto a_at = [&](double beta) {
        ParamMap q = p.with("beta", beta);
        q.set("eta", mart_eta_star(q));
        ++evals;
        return coeff_a(m, q);
      };
      double alo = a_at(lo), ahi = a_at(hi);
      if (std::signbit(alo) == std::signbit(ahi)) {
        // widen once; the sign expression and a vanish together, so this
        // only guards roundoff at the bracket ends
        lo *= 0.99;
        hi *= 1.01;
        alo = a_at(lo);
        ahi = a_at(hi);
      }
      if (std::signbit(alo) == std::signbit(ahi)) {
        log << "gamma=" << gamma << " sigma=" << sigma
            << ": coefficient a does not change sign across the bracket\n";
        continue;
      }
      for (int it = 0; it < 60; ++it) {
        const double mid = std::sqrt(lo * hi);
        const double a_mid = a_at(mid);
        (std::signbit(a_mid) == std::signbit(alo) ? lo : hi) = mid;
      }
      const double beta_star = std::sqrt(lo * hi);
      ParamMap q = p.with("beta", beta_star);
      q.set("eta", mart_eta_star(q));
      base = q;
      log << "gamma=" << gamma << " sigma=" << sigma << " psi=" << psi
          << ": a = 0 at beta = " << beta_star << ", eta = " << q.at("eta")
          << " (" << evals << " evaluations)\n";
      break;
    }
    if (base) break;
  }
  if (!base) {
    rep.add("a = 0 point located in beta", 0.0, 1.0, false,
            "staged search exhausted without a sign change");
    finalize(rep, log);
    return rep;
  }
  rep.params = *base;

  // Base-point verification through the independent modules.
  const double r0_base = r0(m, *base).r0;
  rep.add("base: |R0 - 1| <= 1e-8", 1e-8, std::abs(r0_base - 1.0),
          std::abs(r0_base - 1.0) <= 1e-8);
  const CenterCoefficients C = coefficients(m, *base, "eta", "D");
  rep.coeffs = C;
  rep.add("base: |a| within tolerance", C.tol_a(), std::abs(C.a), C.a_is_zero());
  if (C.c < 0.0) {
    rep.add("base: c < 0", 0.0, C.c, true);
  } else {
    rep.add("base: c < 0", 0.0, C.c, false,
            "c >= 0 at the constructed point; this contradicts the "
            "variation argument that c < 0 somewhere on the a = 0 set "
            "(lowering Lambda raises the quadratic's middle coefficient), "
            "so the search stage should be re-run with smaller Lambda");
  }
  rep.add("base: |e| above tolerance (alpha2 = D)", C.tol_e(), std::abs(C.e),
          C.e_is_nonzero());

  // The D-direction is attempted first for the two-state demonstration, and
  // is detected as degenerate: scaling (B, D, eta) -> (lambda B, lambda D,
  // lambda eta) maps solutions to solutions, so a D-change only re-scales
  // the eta-axis and never opens a fold.
  rep.add("alpha2 = D: manifold-corrected slope vanishes", 1e-6,
          std::abs(C.e_corrected), std::abs(C.e_corrected) <= 1e-6,
          "a D-perturbation is conjugate to an eta-shift");
  int d_windows = 0;
  for (double mag : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    for (double sgn : {1.0, -1.0}) {
      const double dD = sgn * mag * (1.0 + D);
      const auto pr = mart_probe(base->with("D", D + dD));
      log << "alpha2=D probe dD=" << dD << ": "
          << (pr.window ? "window" : pr.why) << "\n";
      if (pr.window) ++d_windows;
    }
  }
  rep.add("alpha2 = D: no two-state window at any staged step", 0.0,
          static_cast<double>(d_windows), d_windows == 0);

  // Fallback direction: the waning rate w. Its corrected slope is nonzero,
  // so a w-perturbation opens a genuine fold below the threshold.
  const CenterCoefficients Cw = coefficients(m, *base, "eta", "w");
  rep.add("alpha2 = w: manifold-corrected slope nonzero", 1e-3,
          std::abs(Cw.e_corrected), std::abs(Cw.e_corrected) > 1e-3);

  bool demonstrated = false;
  double dw_used = 0.0;
  for (double mag : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    if (demonstrated) break;
    for (double sgn : {1.0, -1.0}) {
      const double dw = sgn * mag * (1.0 + std::abs(w));
      ParamMap pert = base->with("w", w + dw);
      const auto pr = mart_probe(pert);
      if (!pr.window) {
        log << "alpha2=w probe dw=" << dw << ": " << pr.why << "\n";
        continue;
      }
      const double eta_mid = 0.5 * (pr.alpha1_fold + pr.alpha1_cross);
      ParamMap at_mid = pert.with("eta", eta_mid);
      const auto pos = positive_states(enumerate_states(m, at_mid));
      const double r0_mid = r0(m, at_mid).r0;
      log << "alpha2=w probe dw=" << dw << ": eta_fold=" << pr.alpha1_fold
          << " eta_cross=" << pr.alpha1_cross << " midpoint eta=" << eta_mid
          << " -> " << pos.size() << " positive states, R0=" << r0_mid << "\n";
      int stable = 0, unstable = 0;
      for (const auto& s : pos) {
        if (s.stability == "stable") ++stable;
        if (s.stability == "unstable") ++unstable;
      }
      if (pos.size() == 2 && stable == 1 && unstable == 1 && r0_mid < 1.0) {
        add_two_state_checks(rep, pos, r0_mid);
        rep.perturbed = at_mid;
        rep.perturbed_states = pos;
        dw_used = dw;
        demonstrated = true;
        break;
      }
    }
  }
  if (!demonstrated) {
    rep.add("perturbed: exactly two positive steady states", 2.0, 0.0, false,
            "no staged w-perturbation produced the two-state window");
  } else {
    // Continuation cross-check: the fold created by the w-perturbation moves
    // at a nonzero rate through the threshold crossing.
    const auto locus = fold_locus(m, *base, "eta", "w", std::abs(dw_used));
    rep.add("alpha2 = w: measured fold-crossing slope nonzero", 1e-3,
            locus.slope_u_threshold,
            !locus.degenerate && std::abs(locus.slope_u_threshold) > 1e-3,
            locus.note.empty() ? "chart-coordinate slope of the threshold root"
                               : locus.note);
  }

  finalize(rep, log);
  return rep;
}

// --- hepatitis model helpers ----------------------------------------------

double hepc_F(const ParamMap& p) {
  const auto q = hepc_dfe_quantities(p);
  return (p.at("b") + p.at("c")) * p.at("r_I") * q.p0 /
             (q.a11 * p.at("T_max")) -
         p.at("c");
}

std::optional<double> hepc_delta_for_r0(const ParamMap& p) {
  const auto q = hepc_dfe_quantities(p);
  const double T_max = p.at("T_max");
  if (q.p0 > T_max) return std::nullopt;
  return p.at("b") * p.at("rho") * p.at("R_star") / (p.at("b") + p.at("c")) +
         p.at("r_I") * (1.0 - q.p0 / T_max);
}

std::optional<double> hepc_rI_for_a0(const ParamMap& p) {
  const auto q = hepc_dfe_quantities(p);
  const double b = p.at("b"), c = p.at("c");
  const double mt = p.at("rho") * p.at("R_star");
  const double den = (b + c) * ((b + c) * (q.a12 - q.a11) + b * mt);
  if (den <= 0.0) return std::nullopt;
  return (p.at("T_max") / q.p0) * b * mt * c * q.a11 / den;
}

// --- theorem 4 -------------------------------------------------------------

RecipeReport theorem4_construct() {
  RecipeReport rep;
  rep.recipe = "theorem4";
  std::ostringstream log;
  const ModelSystem& m = builtin_model("hepc3d");

  // Stage 1: fixed cell-dynamics base; rho is placed a staged margin above
  // the value where the a = 0 equation for r_I loses solvability, then r_I
  // and delta are set by the closed-form relations.
  ParamMap base(std::map<std::string, double>{
      {"R_star", 1.0}, {"T_max", 100.0}, {"b", 1.2}, {"c", 0.9}, {"d", 1.0},
      {"delta", 1.0}, {"r_I", 1.0}, {"r_T", 3.0}, {"rho", 1.0}, {"s", 50.0}});
  const auto q0 = hepc_dfe_quantities(base);
  const double rho_min = (base.at("b") + base.at("c")) * (q0.a11 - q0.a12) /
                         (base.at("b") * base.at("R_star"));
  std::optional<ParamMap> chosen;
  for (double margin : {0.25, 0.5, 0.1}) {
    ParamMap p = base.with("rho", rho_min * (1.0 + margin));
    const auto rI = hepc_rI_for_a0(p);
    if (!rI) {
      log << "margin " << margin << ": a = 0 equation infeasible\n";
      continue;
    }
    p.set("r_I", *rI);
    const auto dl = hepc_delta_for_r0(p);
    if (!dl) {
      log << "margin " << margin << ": threshold delta infeasible\n";
      continue;
    }
    p.set("delta", *dl);
    const CenterCoefficients C = coefficients(m, p, "rho", "r_I");
    const bool ok = std::abs(r0(m, p).r0 - 1.0) <= 1e-8 && C.a_is_zero() &&
                    C.c < 0.0 && C.e_is_nonzero();
    log << "margin " << margin << ": rho=" << p.at("rho") << " r_I=" << *rI
        << " delta=" << *dl << " a=" << C.a << " c=" << C.c << " e=" << C.e
        << (ok ? " (accepted)" : " (rejected)") << "\n";
    if (ok) {
      chosen = p;
      break;
    }
  }
  if (!chosen) {
    rep.add("a = 0 base point", 0.0, 1.0, false,
            "no staged margin produced an admissible a = 0 point");
    finalize(rep, log);
    return rep;
  }
  rep.params = *chosen;
  const ParamMap& p = *chosen;

  const double r0_base = r0(m, p).r0;
  rep.add("base: |R0 - 1| <= 1e-8", 1e-8, std::abs(r0_base - 1.0),
          std::abs(r0_base - 1.0) <= 1e-8);
  const CenterCoefficients C = coefficients(m, p, "rho", "r_I");
  rep.coeffs = C;
  rep.add("base: |a| within tolerance", C.tol_a(), std::abs(C.a), C.a_is_zero());
  rep.add("base: c < 0", 0.0, C.c, C.c < 0.0);
  rep.add("base: |e| above tolerance (alpha2 = r_I)", C.tol_e(), std::abs(C.e),
          C.e_is_nonzero());
  const double fuu_scale = 1e-6 * (1.0 + std::abs(C.b) + std::abs(C.d));
  rep.add("base: fuualpha1 = 0", fuu_scale, std::abs(C.fuualpha1),
          std::abs(C.fuualpha1) <= fuu_scale,
          "alpha1 = rho enters the vector field linearly");

  // Independent computation path for c: closed-form cubic part plus a
  // measured quadratic part under the z = (z1, 0, z3) solvability choice,
  // converted to the pipeline normalization.
  const auto ns = hepc_closed_null(p);
  const auto split = hepc_c_split(m, p, C.null.A);
  const double c_split = (split.c2 + split.c3) / (ns.M * ns.M * ns.vw);
  rep.add("base: c from quadratic+cubic split (1e-5 relative)", 1e-5,
          std::abs(c_split - C.c) / std::abs(C.c),
          std::abs(c_split - C.c) <= 1e-5 * std::abs(C.c));

  // Stage 2: staged r_I perturbation; for each candidate the fold of the
  // cubic reduction is located by bisection on the positive-root count and
  // the fold-to-threshold midpoint is probed.
  bool demonstrated = false;
  double rho_fold_red = 0.0, rho_cross_pert = 0.0;
  ParamMap at_mid;
  std::vector<SteadyState> pos;
  for (double mag : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    if (demonstrated) break;
    for (double sgn : {1.0, -1.0}) {
      const double dr = sgn * mag * (1.0 + std::abs(p.at("r_I")));
      ParamMap pert = p.with("r_I", p.at("r_I") + dr);
      const double rc = hepc_rho_cross(pert);
      const auto rf = hepc_rho_fold(pert, rc);
      if (!rf) {
        log << "alpha2=r_I probe dr=" << dr << ": no two-state window\n";
        continue;
      }
      const double rho_mid = 0.5 * (*rf + rc);
      ParamMap mid = pert.with("rho", rho_mid);
      const auto found = positive_states(enumerate_states(m, mid));
      const double r0_mid = r0(m, mid).r0;
      log << "alpha2=r_I probe dr=" << dr << ": rho_fold=" << *rf
          << " rho_cross=" << rc << " midpoint rho=" << rho_mid << " -> "
          << found.size() << " positive states, R0=" << r0_mid << "\n";
      int stable = 0, unstable = 0;
      for (const auto& s : found) {
        if (s.stability == "stable") ++stable;
        if (s.stability == "unstable") ++unstable;
      }
      if (found.size() == 2 && stable == 1 && unstable == 1 && r0_mid < 1.0) {
        add_two_state_checks(rep, found, r0_mid);
        rep.perturbed = mid;
        rep.perturbed_states = found;
        at_mid = mid;
        pos = found;
        rho_fold_red = *rf;
        rho_cross_pert = rc;
        demonstrated = true;
        break;
      }
    }
  }
  if (!demonstrated) {
    rep.add("perturbed: exactly two positive steady states", 2.0, 0.0, false,
            "no staged r_I-perturbation produced the two-state window");
    finalize(rep, log);
    return rep;
  }

  const auto audit = parity_audit(m, at_mid);
  rep.add("perturbed: parity audit counts two positive states", 2.0,
          static_cast<double>(audit.count),
          audit.count == 2 && audit.parity_ok && !audit.abstained,
          audit.reason);

  // Stage 3: continuation from the unstable state through the fold.
  const SteadyState* unstable_state = nullptr;
  const SteadyState* stable_state = nullptr;
  for (const auto& s : pos) {
    if (s.stability == "unstable") unstable_state = &s;
    if (s.stability == "stable") stable_state = &s;
  }
  TraceOptions opts;
  const double rho_mid = at_mid.at("rho");
  opts.alpha1_min = rho_fold_red - 10.0 * (rho_cross_pert - rho_fold_red);
  opts.alpha1_max = rho_mid;
  opts.max_steps = 4000;
  Branch br = trace(m, at_mid, "rho", *unstable_state, -1, opts);
  auto folds = fold_points(m, br);
  if (folds.empty()) {
    log << "continuation: direction -1 found no fold, retrying +1\n";
    br = trace(m, at_mid, "rho", *unstable_state, +1, opts);
    folds = fold_points(m, br);
  }
  rep.add("continuation: exactly one fold on the connecting branch", 1.0,
          static_cast<double>(folds.size()), folds.size() == 1,
          "branch termination: " + br.termination);
  if (folds.size() == 1) {
    const FoldPoint& fp = folds.front();
    rep.add("continuation: fold location matches the reduction bisection",
            1e-6 * (1.0 + std::abs(rho_fold_red)),
            std::abs(fp.alpha1 - rho_fold_red),
            std::abs(fp.alpha1 - rho_fold_red) <=
                1e-6 * (1.0 + std::abs(rho_fold_red)));
    rep.add("continuation: non-critical eigenvalues negative at the fold", 0.0,
            fp.max_re_other, fp.max_re_other < 0.0,
            "a single real eigenvalue crosses zero at the fold");

    // Parabola property: alpha1 - alpha1_fold grows quadratically in the
    // infected coordinate around the fold.
    const double window = rho_mid - fp.alpha1;
    const double u_fold = fp.x[1];
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    int used = 0;
    for (const auto& bp : br.points) {
      const double da = bp.alpha1 - fp.alpha1;
      if (da < 0.02 * window || da > 0.25 * window) continue;
      const double du = bp.x[1] - u_fold;
      if (du == 0.0) continue;
      const double ratio = da / (du * du);
      rmin = std::min(rmin, ratio);
      rmax = std::max(rmax, ratio);
      ++used;
    }
    rep.add("continuation: fold parabola ratio spread < 2", 2.0,
            used >= 4 ? rmax / rmin : std::numeric_limits<double>::infinity(),
            used >= 4 && rmax / rmin < 2.0,
            "samples used: " + std::to_string(used));

    // The branch that left the unstable state returns past the starting
    // parameter on the other side of the fold; polishing its end point at
    // the starting rho must land on the stable state.
    bool reconnects = false;
    double dist = std::numeric_limits<double>::infinity();
    if (!br.points.empty()) {
      const auto polished =
          newton_solve(m, at_mid, br.points.back().x, 60);
      if (polished) {
        dist = inf_norm(Vec(*polished - stable_state->x));
        reconnects = dist <= 1e-6 * (1.0 + inf_norm(stable_state->x));
      }
    }
    rep.add("continuation: branch reconnects to the stable state",
            1e-6 * (1.0 + inf_norm(stable_state->x)), dist, reconnects);
  }

  finalize(rep, log);
  return rep;
}

// --- truncated model -------------------------------------------------------

RecipeReport truncated_continuum_verify(const ParamMap& params, int x_grid_size) {
  RecipeReport rep;
  rep.recipe = "continuum";
  std::ostringstream log;
  const ModelSystem& m = builtin_model("hepc3d_truncated");

  ParamMap p = params;
  p.set("s", 0.0);
  p.set("d", 0.0);
  const double b = p.at("b"), c = p.at("c"), r_T = p.at("r_T");
  const double T_max = p.at("T_max");
  const double mt = p.at("rho") * p.at("R_star");
  p.set("delta", b * mt / (b + c));
  p.set("r_I", c * r_T / (b + c));
  m.require_admissible(p);
  rep.params = p;
  log << "continuum conditions imposed: delta=" << p.at("delta")
      << " r_I=" << p.at("r_I") << "\n";

  // One-parameter family of steady states, evaluated on an interior grid.
  const double r_I = p.at("r_I"), delta = p.at("delta");
  double worst = 0.0, worst_X = 0.0;
  bool feasible = true;
  for (int k = 1; k <= x_grid_size; ++k) {
    const double X = k / double(x_grid_size + 1);
    const double P =
        T_max * (b * mt * X + (c + b * X) * (r_I - delta)) / (r_I * (c + b * X));
    if (P <= 0.0) {
      feasible = false;
      worst_X = X;
      break;
    }
    Vec x(3);
    x << X * P, (1.0 - X) * P, mt * (1.0 - X) * P / (c + b * X);
    const double res = inf_norm(m.eval(x, p)) / (1.0 + inf_norm(x));
    if (res > worst) {
      worst = res;
      worst_X = X;
    }
  }
  {
    std::ostringstream note;
    note << (feasible ? "worst residual at X = " : "family infeasible at X = ")
         << worst_X;
    rep.add("family: scaled rhs residual on the X grid", 1e-8, worst,
            feasible && worst <= 1e-8, note.str());
  }

  // Quadratic/cubic split of c in the closed-form normalization.
  const Vec x0 = m.dfe(p);
  const Mat A = jacobian(m, x0, p);
  const auto split = hepc_c_split(m, p, A);
  rep.add("c(2) + c(3) = 0", 1e-7 * std::abs(split.c3),
          std::abs(split.c2 + split.c3),
          std::abs(split.c2 + split.c3) <= 1e-7 * std::abs(split.c3));

  const double quoted =
      2.0 * r_T * r_T * b * b * c * (b + c) * mt * (r_T + mt) / (T_max * T_max);
  const double consistent_form =
      2.0 * r_T * r_T * b * b * c * (b + c) * mt * mt / (T_max * T_max);
  {
    std::ostringstream note;
    note << "measured c(2) = " << split.c2 << "; measured/quoted = "
         << split.c2 / quoted
         << "; the measured value equals the same expression with "
            "(r_T + rho R*) replaced by rho R*";
    rep.add("c(2) matches 2 r_T^2 b^2 c (b+c) rho R* (r_T + rho R*) / T_max^2",
            1e-6, std::abs(split.c2 - quoted) / std::abs(quoted),
            std::abs(split.c2 - quoted) <= 1e-6 * std::abs(quoted), note.str());
  }
  rep.add("c(2) matches 2 r_T^2 b^2 c (b+c) (rho R*)^2 / T_max^2", 1e-6,
          std::abs(split.c2 - consistent_form) / std::abs(consistent_form),
          std::abs(split.c2 - consistent_form) <=
              1e-6 * std::abs(consistent_form));

  // Full-pipeline c at the continuum point, measured against the size of the
  // cubic part in the same normalization.
  const auto ns = hepc_closed_null(p);
  const double c3_norm = std::abs(split.c3) / (ns.M * ns.M * ns.vw);
  const CenterCoefficients C = coefficients(m, p, "rho", "");
  rep.coeffs = C;
  rep.add("pipeline c vanishes at the continuum point", 1e-6 * c3_norm,
          std::abs(C.c), std::abs(C.c) <= 1e-6 * c3_norm);

  finalize(rep, log);
  return rep;
}

std::string to_string(TruncatedRootClass c) {
  switch (c) {
    case TruncatedRootClass::unique_positive:
      return "unique-positive";
    case TruncatedRootClass::none:
      return "none";
    case TruncatedRootClass::continuum:
      return "continuum";
  }
  return "none";
}

TruncatedRootReport truncated_unique_root(const ParamMap& params) {
  ParamMap p = params;
  p.set("s", 0.0);
  p.set("d", 0.0);
  const double b = p.at("b"), c = p.at("c"), r_T = p.at("r_T");
  const double delta = p.at("delta"), r_I = p.at("r_I");
  const double mt = p.at("rho") * p.at("R_star");

  TruncatedRootReport out;
  out.A = b * (delta - mt) + r_I * b * mt / r_T;
  out.B = r_I * b * mt / r_T - c * delta;
  const double scale = std::abs(b * delta) + std::abs(b * mt) +
                       std::abs(r_I * b * mt / r_T) + std::abs(c * delta);
  const double zt = 1e-12 * scale;
  const bool a_zero = std::abs(out.A) <= zt, b_zero = std::abs(out.B) <= zt;
  if (a_zero && b_zero) {
    out.cls = TruncatedRootClass::continuum;
  } else if (!a_zero && !b_zero && std::signbit(out.A) == std::signbit(out.B)) {
    out.cls = TruncatedRootClass::unique_positive;
  } else {
    out.cls = TruncatedRootClass::none;
  }

  const ModelSystem& m = builtin_model("hepc3d_truncated");
  for (const auto& s : enumerate_states(m, p)) {
    if (s.positivity == Positivity::positive) ++out.enumerated_positive;
  }
  switch (out.cls) {
    case TruncatedRootClass::unique_positive:
      out.consistent = out.enumerated_positive == 1;
      break;
    case TruncatedRootClass::none:
      out.consistent = out.enumerated_positive == 0;
      break;
    case TruncatedRootClass::continuum:
      out.consistent = out.enumerated_positive >= 2;
      break;
  }
  return out;
}

}  // namespace bifurcat
