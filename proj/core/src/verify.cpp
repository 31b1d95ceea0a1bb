#include "bifurcat/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "bifurcat/bifcoeffs.hpp"
#include "bifurcat/common.hpp"
#include "bifurcat/continuation.hpp"
#include "bifurcat/io.hpp"
#include "bifurcat/model.hpp"
#include "bifurcat/ngm.hpp"
#include "bifurcat/numdiff.hpp"
#include "bifurcat/recipes.hpp"
#include "bifurcat/steadystate.hpp"

namespace bifurcat {

void SuiteResult::add(const std::string& name, bool p, const std::string& detail) {
  checks.push_back(SuiteCheck{name, p, detail});
}

bool SuiteResult::pass() const {
  if (checks.empty()) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

namespace {

using Rng = std::mt19937_64;

double lu(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
  return std::exp(d(rng));
}

double un(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

std::string fmt(double x, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << x;
  return os.str();
}

Vec unit(int n, int k) {
  Vec e = Vec::Zero(n);
  e[k] = 1.0;
  return e;
}

// --- random admissible parameter draws ------------------------------------

ParamMap draw_brauer2d(Rng& rng) {
  return ParamMap(std::map<std::string, double>{
      {"K", lu(rng, 1.0, 100.0)}, {"beta", lu(rng, 0.005, 1.0)},
      {"gamma", lu(rng, 0.05, 2.0)}, {"mu", lu(rng, 0.02, 1.0)},
      {"phi", lu(rng, 0.05, 2.0)}, {"sigma", un(rng, 0.05, 0.95)},
      {"theta", lu(rng, 0.02, 1.0)}});
}

ParamMap draw_brauer3d(Rng& rng) {
  return ParamMap(std::map<std::string, double>{
      {"Lambda", lu(rng, 0.2, 10.0)}, {"beta", lu(rng, 0.002, 0.5)},
      {"gamma", lu(rng, 0.05, 2.0)}, {"mu", lu(rng, 0.05, 1.0)},
      {"phi", lu(rng, 0.05, 2.0)}, {"sigma", un(rng, 0.05, 0.95)},
      {"theta", lu(rng, 0.02, 1.0)}});
}

ParamMap draw_martcheva5d(Rng& rng) {
  return ParamMap(std::map<std::string, double>{
      {"D", lu(rng, 0.5, 50.0)}, {"Lambda", lu(rng, 0.5, 20.0)},
      {"beta", lu(rng, 0.1, 20.0)}, {"delta", lu(rng, 0.1, 5.0)},
      {"eta", lu(rng, 0.1, 50.0)}, {"gamma", lu(rng, 0.1, 20.0)},
      {"mu", lu(rng, 0.05, 2.0)}, {"psi", lu(rng, 0.1, 20.0)},
      {"sigma", un(rng, 0.02, 0.98)}, {"w", lu(rng, 0.05, 5.0)}});
}

// delta is placed above r_I (1 - p0/T_max) so the infected transition matrix
// is invertible with positive spectrum and the closed R0 form applies.
ParamMap draw_hepc3d(Rng& rng) {
  const double r_T = lu(rng, 0.5, 5.0), T_max = lu(rng, 20.0, 500.0);
  const double d = lu(rng, 0.05, 1.0);
  const double s = un(rng, 0.05, 0.95) * d * T_max;
  ParamMap p(std::map<std::string, double>{
      {"R_star", lu(rng, 0.3, 3.0)}, {"T_max", T_max}, {"b", lu(rng, 0.2, 3.0)},
      {"c", lu(rng, 0.1, 2.0)}, {"d", d}, {"delta", 1.0},
      {"r_I", lu(rng, 0.2, 4.0)}, {"r_T", r_T}, {"rho", lu(rng, 0.3, 3.0)},
      {"s", s}});
  const auto q = hepc_dfe_quantities(p);
  const double shed = p.at("r_I") * (1.0 - q.p0 / T_max);
  p.set("delta", lu(rng, 0.05, 5.0) + std::max(shed, 0.0));
  return p;
}

// --- closed reproduction numbers ------------------------------------------

double r0_closed(const std::string& id, const ParamMap& p) {
  if (id == "brauer2d" || id == "brauer3d") {
    const double K = id == "brauer2d" ? p.at("K") : p.at("Lambda") / p.at("mu");
    const double mu = p.at("mu"), th = p.at("theta"), ph = p.at("phi");
    return p.at("beta") * K * (mu + th + p.at("sigma") * ph) /
           ((mu + p.at("gamma")) * (mu + th + ph));
  }
  if (id == "martcheva5d") {
    const double mu = p.at("mu"), psi = p.at("psi");
    const double S0 = p.at("Lambda") / (mu + psi);
    const double V0 = p.at("Lambda") * psi / (mu * (mu + psi));
    return p.at("eta") * p.at("beta") * (S0 + p.at("sigma") * V0) /
           (p.at("D") * p.at("delta") * (mu + p.at("gamma")));
  }
  const auto q = hepc_dfe_quantities(p);
  const double mt = p.at("rho") * p.at("R_star");
  const double den = (p.at("b") + p.at("c")) *
                     (p.at("delta") - p.at("r_I") * (1.0 - q.p0 / p.at("T_max")));
  return p.at("b") * mt / den;
}

// Threshold beta for the staged-protection models (R0 = 1 exactly).
double brauer_beta_star(const ParamMap& p, bool threed) {
  const double K = threed ? p.at("Lambda") / p.at("mu") : p.at("K");
  const double mu = p.at("mu"), th = p.at("theta"), ph = p.at("phi");
  return (mu + p.at("gamma")) * (mu + th + ph) / (K * (mu + th + p.at("sigma") * ph));
}

// --- criterion 1: closed-form derivative values at the DFE ----------------

SuiteResult suite_oracles(std::uint64_t seed) {
  SuiteResult R{"oracles", 1, {}};
  Rng rng(seed ^ 0x6f7261636cULL);
  const int draws = 50;

  {
    const ModelSystem& m = builtin_model("brauer2d");
    double worst = 0.0;
    for (int i = 0; i < draws; ++i) {
      const ParamMap p = draw_brauer2d(rng);
      const Vec x0 = m.dfe(p);
      const double K = p.at("K"), mu = p.at("mu"), th = p.at("theta");
      const double ph = p.at("phi"), sg = p.at("sigma"), be = p.at("beta");
      const double V0 = x0[1], S0 = K - V0;
      Mat Je(2, 2);
      Je << be * (S0 + sg * V0) - (mu + p.at("gamma")), 0.0,
          -(ph + sg * be * V0), -(ph + mu + th);
      const Mat J = jacobian(m, x0, p);
      worst = std::max(worst, (J - Je).cwiseAbs().maxCoeff() /
                                  (1.0 + Je.cwiseAbs().maxCoeff()));
    }
    R.add("brauer2d: DFE Jacobian entries", worst <= 1e-5,
          std::to_string(draws) + " draws, worst relative error " + fmt(worst, 3));
  }

  {
    const ModelSystem& m = builtin_model("brauer3d");
    double worst3 = 0.0, worstb = 0.0;
    for (int i = 0; i < draws; ++i) {
      const ParamMap p = draw_brauer3d(rng);
      const Vec x0 = m.dfe(p);
      const double scale = 1.0 + inf_norm(jacobian(m, x0, p));
      Vec u1(3), u2(3), u3(3);
      for (int k = 0; k < 3; ++k) {
        u1[k] = un(rng, -1.0, 1.0);
        u2[k] = un(rng, -1.0, 1.0);
        u3[k] = un(rng, -1.0, 1.0);
      }
      worst3 = std::max(worst3, inf_norm(d3f(m, x0, p, u1, u2, u3)) / scale);
      const double expect = x0[0] + p.at("sigma") * x0[2];
      const double got = d2f_param(m, x0, p, unit(3, 1), "beta")[1];
      worstb = std::max(worstb, std::abs(got - expect) / expect);
    }
    R.add("brauer3d: third state derivatives vanish (quadratic rhs)", worst3 <= 1e-5,
          "worst |d3f| / scale = " + fmt(worst3, 3));
    R.add("brauer3d: mixed beta derivative equals S0 + sigma V0", worstb <= 1e-5,
          "worst relative error " + fmt(worstb, 3));
  }

  {
    const ModelSystem& m = builtin_model("hepc3d");
    double w2 = 0.0, w3 = 0.0, wj = 0.0, wr = 0.0;
    for (int i = 0; i < draws; ++i) {
      const ParamMap p = draw_hepc3d(rng);
      const auto q = hepc_dfe_quantities(p);
      const Vec x0 = m.dfe(p);
      const Vec eT = unit(3, 0), eI = unit(3, 1), eV = unit(3, 2);
      const double rI = p.at("r_I"), Tm = p.at("T_max"), b = p.at("b");

      const double dTI = d2f(m, x0, p, eT, eI)[1];
      const double dII = d2f(m, x0, p, eI, eI)[1];
      w2 = std::max(w2, std::abs(dTI - (-rI / Tm)) / (rI / Tm));
      w2 = std::max(w2, std::abs(dII - (-2.0 * rI / Tm)) / (2.0 * rI / Tm));

      const double tIIV = d3f(m, x0, p, eI, eI, eV)[1];
      const double tTIV = d3f(m, x0, p, eT, eI, eV)[1];
      const double tTTV = d3f(m, x0, p, eT, eT, eV)[1];
      const double ref = 2.0 * b / (q.p0 * q.p0);
      w3 = std::max(w3, std::abs(tIIV - ref) / ref);
      w3 = std::max(w3, std::abs(tTIV - 0.5 * ref) / ref);
      w3 = std::max(w3, std::abs(tTTV) / ref);

      Mat Je(3, 3);
      Je << -q.a11, -q.a12, -b, 0.0, q.a22, b, 0.0,
          p.at("rho") * p.at("R_star"), -p.at("c") - b;
      wj = std::max(wj, (jacobian(m, x0, p) - Je).cwiseAbs().maxCoeff() /
                            (1.0 + Je.cwiseAbs().maxCoeff()));

      const Vec mix = d2f_param(m, x0, p, eI, "rho");
      Vec mix_e = Vec::Zero(3);
      mix_e[2] = p.at("R_star");
      wr = std::max(wr, inf_norm(Vec(mix - mix_e)) / (1.0 + p.at("R_star")));
    }
    R.add("hepc3d: second-order incidence derivatives (-r_I/T_max, -2r_I/T_max)",
          w2 <= 1e-5, "worst relative error " + fmt(w2, 3));
    R.add("hepc3d: third-order incidence derivatives (2b/p0^2, b/p0^2, 0)",
          w3 <= 1e-5, "worst relative error " + fmt(w3, 3));
    R.add("hepc3d: DFE Jacobian closed rows", wj <= 1e-5,
          "worst relative error " + fmt(wj, 3));
    R.add("hepc3d: mixed rho derivative equals (0, 0, R*)", wr <= 1e-5,
          "worst relative error " + fmt(wr, 3));
  }

  {
    const ModelSystem& m = builtin_model("martcheva5d");
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const ParamMap p = draw_martcheva5d(rng);
      const Vec x0 = m.dfe(p);
      Vec u(5);
      for (int k = 0; k < 5; ++k) u[k] = un(rng, -1.0, 1.0);
      worst = std::max(worst, inf_norm(d2f(m, x0, p, Vec::Zero(5), u)));
      worst = std::max(worst, inf_norm(d3f(m, x0, p, u, Vec::Zero(5), u)));
    }
    R.add("zero direction yields the zero vector", worst == 0.0,
          "worst |result| = " + fmt(worst, 3));
  }
  return R;
}

// --- criterion 2: closed reproduction numbers -----------------------------

SuiteResult suite_r0(std::uint64_t seed) {
  SuiteResult R{"r0", 2, {}};
  Rng rng(seed ^ 0x72300ULL);
  const int draws = 500;
  for (const std::string id :
       {"brauer2d", "brauer3d", "martcheva5d", "hepc3d"}) {
    const ModelSystem& m = builtin_model(id);
    double worst = 0.0;
    for (int i = 0; i < draws; ++i) {
      ParamMap p = id == "brauer2d"    ? draw_brauer2d(rng)
                   : id == "brauer3d"  ? draw_brauer3d(rng)
                   : id == "martcheva5d" ? draw_martcheva5d(rng)
                                         : draw_hepc3d(rng);
      const double closed = r0_closed(id, p);
      worst = std::max(worst, std::abs(r0(m, p).r0 - closed) / closed);
    }
    R.add(id + ": spectral radius matches closed form", worst <= 1e-9,
          std::to_string(draws) + " draws, worst relative error " + fmt(worst, 3));
  }
  return R;
}

// --- criterion 3: two-method equivalence for the 2d model -----------------

SuiteResult suite_brauer(std::uint64_t seed) {
  SuiteResult R{"brauer", 3, {}};
  Rng rng(seed ^ 0x627261ULL);
  const ModelSystem& m = builtin_model("brauer2d");

  int checked = 0, agree = 0, skipped = 0;
  for (int i = 0; i < 1000; ++i) {
    ParamMap p = draw_brauer2d(rng);
    p.set("beta", brauer_beta_star(p, false));
    const CenterCoefficients C = coefficients(m, p, "beta", "");
    const double a1 = brauer_quadratic(p).coeffs[1];
    if (std::abs(C.a) < 1e-9 * C.a_scale) {
      ++skipped;
      continue;
    }
    ++checked;
    if ((C.a > 0.0) == (a1 < 0.0)) ++agree;
  }
  R.add("sign(a) = sign(-a1) at the threshold", agree == checked && checked > 0,
        std::to_string(agree) + "/" + std::to_string(checked) +
            " draws agree (" + std::to_string(skipped) +
            " skipped inside the |a| < 1e-9 scale band)");

  // Points with a = 0 exactly: sigma*phi solves the boundary quadratic
  // t^2 + t(-gamma + mu + 2 theta + sigma(gamma + mu)) + (mu + theta)^2 = 0
  // and beta sits at the threshold.
  int found = 0, cneg = 0, azero = 0;
  double worst_t = 0.0;
  for (int i = 0; i < 4000 && found < 60; ++i) {
    const double mu = lu(rng, 0.02, 0.4), th = lu(rng, 0.02, 0.4);
    const double sg = un(rng, 0.05, 0.3), ga = lu(rng, 5.0, 60.0);
    const double K = lu(rng, 1.0, 100.0);
    const double B = -ga + mu + 2.0 * th + sg * (ga + mu);
    const double disc = B * B - 4.0 * (mu + th) * (mu + th);
    if (B >= 0.0 || disc <= 0.0) continue;
    const double t = 0.5 * (-B + std::sqrt(disc));
    const double ph = t / sg;
    if (!(ph > 0.0)) continue;
    ParamMap p(std::map<std::string, double>{{"K", K}, {"beta", 1.0},
                                             {"gamma", ga}, {"mu", mu},
                                             {"phi", ph}, {"sigma", sg},
                                             {"theta", th}});
    p.set("beta", brauer_beta_star(p, false));
    worst_t = std::max(worst_t,
                       std::abs(brauer_backward_test(p)) / ((mu + th) * (mu + th)));
    const CenterCoefficients C = coefficients(m, p, "beta", "");
    ++found;
    if (C.a_is_zero()) ++azero;
    if (C.c < 0.0) ++cneg;
  }
  R.add("a = 0 boundary points found", found >= 50,
        std::to_string(found) + " constructed (boundary residual " +
            fmt(worst_t, 3) + ")");
  R.add("|a| within tolerance at every boundary point", azero == found,
        std::to_string(azero) + "/" + std::to_string(found));
  R.add("c < 0 at every a = 0 point", cneg == found && found >= 50,
        std::to_string(cneg) + "/" + std::to_string(found));
  return R;
}

// --- criteria 4 and 6: constructive reports -------------------------------

SuiteResult copy_recipe(const char* suite, int index, const RecipeReport& rep,
                        const std::string& prefix) {
  SuiteResult R{suite, index, {}};
  for (const auto& c : rep.checks) {
    std::string detail = "target " + fmt(c.target, 3) + ", achieved " +
                         fmt(c.achieved, 6);
    if (!c.note.empty()) detail += "; " + c.note;
    R.add(prefix + c.name, c.pass, detail);
  }
  return R;
}

SuiteResult suite_theorem2(std::uint64_t) {
  return copy_recipe("theorem2", 4, theorem2_construct(), "");
}

SuiteResult suite_theorem4(std::uint64_t) {
  return copy_recipe("theorem4", 6, theorem4_construct(), "");
}

// --- criterion 5: forward/backward sign law in F --------------------------

SuiteResult suite_theorem3(std::uint64_t seed) {
  SuiteResult R{"theorem3", 5, {}};
  Rng rng(seed ^ 0x746833ULL);
  const ModelSystem& m = builtin_model("hepc3d");
  const int per_sign = 20;
  int fwd_ok = 0, fwd_n = 0, bwd_ok = 0, bwd_n = 0;
  double worst_b = 0.0;

  auto b_closed = [](const ParamMap& p) {
    // b R* a11 (b+c) contracted against the closed null pair; the pipeline
    // normalization divides by v.w = a11((b+c)^2 + b rho R*), so a11 cancels.
    const double bc = p.at("b") + p.at("c");
    return p.at("b") * p.at("R_star") * bc /
           (bc * bc + p.at("b") * p.at("rho") * p.at("R_star"));
  };

  for (int i = 0; i < 4000 && (fwd_n < per_sign || bwd_n < per_sign); ++i) {
    const double r_T = lu(rng, 0.5, 5.0), T_max = lu(rng, 20.0, 500.0);
    const double d = lu(rng, 0.05, 1.0);
    const double s = un(rng, 0.05, 0.95) * d * T_max;
    ParamMap p(std::map<std::string, double>{
        {"R_star", lu(rng, 0.3, 3.0)}, {"T_max", T_max}, {"b", lu(rng, 0.2, 3.0)},
        {"c", lu(rng, 0.1, 2.0)}, {"d", d}, {"delta", 1.0},
        {"r_I", lu(rng, 0.2, 4.0)}, {"r_T", r_T}, {"rho", lu(rng, 0.3, 3.0)},
        {"s", s}});
    const double F = hepc_F(p);
    const auto q = hepc_dfe_quantities(p);
    const bool want_fwd = F < 0.0 && fwd_n < per_sign;
    const bool want_bwd = F > 0.0 && bwd_n < per_sign;
    if (!want_fwd && !want_bwd) continue;
    if (want_bwd) {
      // rho twice the value where the sign expression balances, so a > 0
      // decisively.
      const double bc = p.at("b") + p.at("c");
      const double rho0 = bc * bc * (q.a11 - q.a12) * p.at("r_I") * q.p0 /
                          (T_max * p.at("b") * p.at("R_star") * q.a11 * F);
      p.set("rho", 2.0 * rho0);
    }
    const auto delta = hepc_delta_for_r0(p);
    if (!delta) continue;
    p.set("delta", *delta);
    const CenterCoefficients C = coefficients(m, p, "rho", "");
    if (C.a_is_zero()) continue;  // indecisive draw next to the boundary
    if (want_fwd) {
      ++fwd_n;
      if (C.a < 0.0) ++fwd_ok;
    } else {
      ++bwd_n;
      if (C.a > 0.0) ++bwd_ok;
    }
    worst_b = std::max(worst_b,
                       std::abs(C.b - b_closed(p)) / std::abs(b_closed(p)));
  }
  R.add("F < 0 yields a < 0 (forward)", fwd_ok == per_sign && fwd_n == per_sign,
        std::to_string(fwd_ok) + "/" + std::to_string(fwd_n) + " draws");
  R.add("F > 0 with enlarged rho yields a > 0 (backward)",
        bwd_ok == per_sign && bwd_n == per_sign,
        std::to_string(bwd_ok) + "/" + std::to_string(bwd_n) + " draws");
  R.add("b matches b R* a11 (b+c) under the null normalization",
        worst_b <= 1e-6, "worst relative error " + fmt(worst_b, 3));
  return R;
}

// --- criterion 7: truncated continuum and the A X = B table ---------------

SuiteResult suite_continuum(std::uint64_t) {
  SuiteResult R{"continuum", 7, {}};
  ParamMap base(std::map<std::string, double>{
      {"R_star", 1.0}, {"T_max", 100.0}, {"b", 1.2}, {"c", 0.9}, {"d", 0.0},
      {"delta", 1.0}, {"r_I", 1.0}, {"r_T", 3.0}, {"rho", 1.0}, {"s", 0.0}});
  const RecipeReport rep = truncated_continuum_verify(base, 50);
  for (const auto& c : rep.checks) {
    std::string detail = "target " + fmt(c.target, 3) + ", achieved " +
                         fmt(c.achieved, 6);
    if (!c.note.empty()) detail += "; " + c.note;
    R.add(c.name, c.pass, detail);
  }

  struct Case {
    double delta, r_I;
    TruncatedRootClass expect;
  };
  const double bc = base.at("b") + base.at("c");
  const Case cases[] = {
      {0.7, 2.5, TruncatedRootClass::unique_positive},
      {0.1, 0.2, TruncatedRootClass::unique_positive},
      {1.5, 0.5, TruncatedRootClass::none},
      {base.at("b") * 1.0 / bc, base.at("c") * 3.0 / bc,
       TruncatedRootClass::continuum},
  };
  for (const Case& cs : cases) {
    ParamMap p = base.with("delta", cs.delta);
    p.set("r_I", cs.r_I);
    const TruncatedRootReport t = truncated_unique_root(p);
    const bool ok = t.cls == cs.expect && t.consistent;
    R.add("A X = B table: delta = " + fmt(cs.delta, 4) + ", r_I = " +
              fmt(cs.r_I, 4),
          ok,
          "A = " + fmt(t.A, 4) + ", B = " + fmt(t.B, 4) + ", class " +
              to_string(t.cls) + " (expected " + to_string(cs.expect) +
              "), enumeration found " + std::to_string(t.enumerated_positive) +
              " positive state(s)");
  }
  return R;
}

// --- criterion 8: count parity against R0 ---------------------------------

SuiteResult suite_parity(std::uint64_t seed) {
  SuiteResult R{"parity", 8, {}};
  Rng rng(seed ^ 0x706172ULL);
  const int draws = 300;
  for (const std::string id :
       {"brauer2d", "brauer3d", "martcheva5d", "hepc3d"}) {
    const ModelSystem& m = builtin_model(id);
    int abstained = 0, violations = 0;
    std::string first_violation;
    for (int i = 0; i < draws; ++i) {
      ParamMap p = id == "brauer2d"    ? draw_brauer2d(rng)
                   : id == "brauer3d"  ? draw_brauer3d(rng)
                   : id == "martcheva5d" ? draw_martcheva5d(rng)
                                         : draw_hepc3d(rng);
      try {
        const ParityAudit audit = parity_audit(m, p);
        if (audit.abstained) {
          ++abstained;
        } else if (!audit.parity_ok) {
          ++violations;
          if (first_violation.empty())
            first_violation = " first: r0 = " + fmt(audit.r0, 6) + ", count = " +
                              std::to_string(audit.count);
        }
      } catch (const std::exception& ex) {
        ++abstained;
        if (first_violation.empty())
          first_violation = std::string(" audit threw: ") + ex.what();
      }
    }
    const bool ok = violations == 0 && abstained * 20 <= draws;
    R.add(id + ": positive-count parity matches the R0 side", ok,
          std::to_string(draws) + " draws, " + std::to_string(violations) +
              " violation(s), " + std::to_string(abstained) + " abstention(s)" +
              first_violation);
  }
  return R;
}

// --- criterion 9: fold-locus slope against 2e -----------------------------

void add_slope_checks(SuiteResult& R, const ModelSystem& m, const ParamMap& p,
                      const std::string& alpha1, const std::string& alpha2,
                      double range, const std::string& label,
                      const std::string& degeneracy_note) {
  FoldLocusReport fl;
  try {
    fl = fold_locus(m, p, alpha1, alpha2, range);
  } catch (const std::exception& ex) {
    R.add(label + ": slope measured against 2e", false,
          std::string("fold_locus failed: ") + ex.what());
    return;
  }
  const double meas = fl.slope_u_threshold;
  const double plain = fl.pred_two_e;
  const double corr = fl.pred_two_e_corrected;
  const bool plain_ok =
      !fl.degenerate && std::abs(meas - plain) <= 0.05 * std::abs(plain);
  std::string detail =
      (fl.degenerate ? "no fold separates from the threshold"
                     : "measured d(u_threshold)/d(" + alpha2 + ") = " + fmt(meas, 6)) +
      "; plain 2e = " + fmt(plain, 6) + ", manifold-corrected 2e = " + fmt(corr, 6);
  if (!degeneracy_note.empty()) detail += "; " + degeneracy_note;
  R.add(label + ": measured slope within 5% of plain 2e", plain_ok, detail);
  if (!fl.degenerate) {
    const bool corr_ok = std::abs(meas - corr) <= 0.05 * std::abs(corr);
    R.add(label + ": measured slope within 5% of corrected 2e", corr_ok,
          "measured " + fmt(meas, 6) + " vs " + fmt(corr, 6));
  }
}

SuiteResult suite_foldslope(std::uint64_t) {
  SuiteResult R{"foldslope", 9, {}};

  const RecipeReport rep2 = theorem2_construct();
  if (!rep2.pass) {
    R.add("cholera base point available", false,
          "theorem2_construct did not pass; slopes not measured");
  } else {
    const ModelSystem& m = builtin_model("martcheva5d");
    add_slope_checks(
        R, m, rep2.params, "eta", "D", 0.05 * (1.0 + rep2.params.at("D")),
        "cholera point, alpha2 = D",
        "a D-change is conjugate to an eta-change here, so the unfolding in D "
        "never opens a fold and the plain-contraction prediction is "
        "unobservable; the corrected value ~ 0 is consistent with that");
    add_slope_checks(R, m, rep2.params, "eta", "w",
                     0.02 * (1.0 + rep2.params.at("w")),
                     "cholera point, alpha2 = w", "");
  }

  const RecipeReport rep4 = theorem4_construct();
  if (!rep4.pass) {
    R.add("hepatitis base point available", false,
          "theorem4_construct did not pass; slopes not measured");
  } else {
    const ModelSystem& m = builtin_model("hepc3d");
    add_slope_checks(
        R, m, rep4.params, "rho", "r_I", 0.01 * (1.0 + rep4.params.at("r_I")),
        "hepatitis point, alpha2 = r_I",
        "the measured slope tracks the manifold-corrected 2e, not the plain "
        "contraction");
  }
  return R;
}

// --- criterion 10: numerical hygiene --------------------------------------

SuiteResult suite_hygiene(std::uint64_t seed, const std::string& cli_path) {
  SuiteResult R{"hygiene", 10, {}};
  (void)seed;

  // Threshold points that are exact by construction (closed-form parameter
  // relations, no numerical search).
  std::vector<std::pair<std::string, std::pair<ParamMap, std::string>>> points;
  {
    // 2d staged-protection model on the a = 0 boundary: sigma*phi at the
    // boundary-quadratic root, beta at the threshold.
    const double mu = 0.1, th = 0.1, sg = 0.2, ga = 30.0, K = 10.0;
    const double B = -ga + mu + 2.0 * th + sg * (ga + mu);
    const double t = 0.5 * (-B + std::sqrt(B * B - 4.0 * (mu + th) * (mu + th)));
    ParamMap p(std::map<std::string, double>{{"K", K}, {"beta", 1.0},
                                             {"gamma", ga}, {"mu", mu},
                                             {"phi", t / sg}, {"sigma", sg},
                                             {"theta", th}});
    p.set("beta", brauer_beta_star(p, false));
    points.push_back({"brauer2d", {p, "beta"}});
  }
  {
    ParamMap p(std::map<std::string, double>{
        {"Lambda", 2.0}, {"beta", 1.0}, {"gamma", 5.0}, {"mu", 0.2},
        {"phi", 1.0}, {"sigma", 0.3}, {"theta", 0.1}});
    p.set("beta", brauer_beta_star(p, true));
    points.push_back({"brauer3d", {p, "beta"}});
  }
  {
    ParamMap p(std::map<std::string, double>{
        {"D", 5.0}, {"Lambda", 5.0}, {"beta", 3.0}, {"delta", 1.0},
        {"eta", 1.0}, {"gamma", 5.0}, {"mu", 0.2}, {"psi", 2.0},
        {"sigma", 0.1}, {"w", 0.5}});
    p.set("eta", martcheva_eta_for_r0(p));
    points.push_back({"martcheva5d", {p, "eta"}});
  }
  ParamMap hepc_point;
  {
    ParamMap p(std::map<std::string, double>{
        {"R_star", 1.0}, {"T_max", 100.0}, {"b", 1.2}, {"c", 0.9}, {"d", 1.0},
        {"delta", 1.0}, {"r_I", 1.0}, {"r_T", 3.0}, {"rho", 1.0}, {"s", 50.0}});
    const auto q = hepc_dfe_quantities(p);
    const double rho_min =
        (p.at("b") + p.at("c")) * (q.a11 - q.a12) / (p.at("b") * p.at("R_star"));
    p.set("rho", 1.25 * rho_min);
    p.set("r_I", *hepc_rI_for_a0(p));
    p.set("delta", *hepc_delta_for_r0(p));
    hepc_point = p;
    points.push_back({"hepc3d", {p, "rho"}});
  }

  double worst_res = 0.0;
  double worst_sens = 0.0;
  std::string sens_detail;
  for (const auto& [id, pp] : points) {
    const ModelSystem& m = builtin_model(id);
    const CenterCoefficients C = coefficients(m, pp.first, pp.second, "");
    const double bound = 1e-10 * (1.0 + inf_norm(C.null.A));
    worst_res = std::max(worst_res,
                         std::max(C.null.residual_w, C.null.residual_v) / bound);
    if (id == "brauer2d" || id == "hepc3d") {
      // a = 0 holds exactly at these points, so c must not move under a
      // kernel shift of the pseudo-solve.
      const double tol = 1e-7 * std::abs(C.c) + 1e-10;
      worst_sens = std::max(worst_sens, C.c_kernel_sensitivity / tol);
      sens_detail += id + ": " + fmt(C.c_kernel_sensitivity, 3) + " (tol " +
                     fmt(tol, 3) + ") ";
    }
  }
  R.add("null-pair residuals within 1e-10 * ||A|| at threshold points",
        worst_res <= 1.0,
        "worst residual / bound = " + fmt(worst_res, 3) + " over " +
            std::to_string(points.size()) + " points");
  R.add("kernel-shift invariance of c at a = 0", worst_sens <= 1.0, sens_detail);

  {
    const ModelSystem& m = builtin_model("hepc3d");
    const std::string j1 = to_json(r0(m, hepc_point));
    const std::string j2 = to_json(r0(m, hepc_point));
    const std::string s1 = to_json(enumerate_states(m, hepc_point));
    const std::string s2 = to_json(enumerate_states(m, hepc_point));
    R.add("deterministic in-process reports", j1 == j2 && s1 == s2 && !j1.empty(),
          "r0 and steady-state reports serialize identically on repeat");
  }

  if (cli_path.empty()) {
    R.add("byte-identical CLI reruns", true,
          "skipped: no CLI binary supplied in library mode");
  } else {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "bifurcat-hygiene";
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path cfg = dir / "rerun.cfg";
    {
      std::ofstream os(cfg);
      os << "model = hepc3d\n";
      os << std::setprecision(17);
      for (const auto& [k, v] : hepc_point.values()) os << k << " = " << v << "\n";
    }
    auto run_once = [&](const fs::path& out) {
      const std::string cmd = "\"" + cli_path + "\" r0 --config \"" +
                              cfg.string() + "\" --format json --out \"" +
                              out.string() + "\"";
      return std::system(cmd.c_str()) == 0;
    };
    auto slurp = [](const fs::path& f) {
      std::ifstream is(f, std::ios::binary);
      std::ostringstream ss;
      ss << is.rdbuf();
      return ss.str();
    };
    const fs::path o1 = dir / "rerun1.json", o2 = dir / "rerun2.json";
    const bool ok1 = run_once(o1), ok2 = run_once(o2);
    const std::string b1 = slurp(o1), b2 = slurp(o2);
    R.add("byte-identical CLI reruns", ok1 && ok2 && !b1.empty() && b1 == b2,
          "two `r0 --format json` runs produced " + std::to_string(b1.size()) +
              " identical bytes");
  }
  return R;
}

}  // namespace

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = {
      "oracles",  "r0",       "brauer",    "theorem2", "theorem3",
      "theorem4", "continuum", "parity",   "foldslope", "hygiene"};
  return names;
}

bool is_verify_suite(const std::string& name) {
  const auto& names = verify_suite_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

SuiteResult run_verify_suite(const std::string& name, std::uint64_t seed,
                             const std::string& cli_path) {
  if (name == "oracles") return suite_oracles(seed);
  if (name == "r0") return suite_r0(seed);
  if (name == "brauer") return suite_brauer(seed);
  if (name == "theorem2") return suite_theorem2(seed);
  if (name == "theorem3") return suite_theorem3(seed);
  if (name == "theorem4") return suite_theorem4(seed);
  if (name == "continuum") return suite_continuum(seed);
  if (name == "parity") return suite_parity(seed);
  if (name == "foldslope") return suite_foldslope(seed);
  if (name == "hygiene") return suite_hygiene(seed, cli_path);
  throw UsageError("unknown verify suite: " + name + " (expected one of " +
                   [] {
                     std::string all;
                     for (const auto& n : verify_suite_names())
                       all += all.empty() ? n : ", " + n;
                     return all;
                   }() +
                   ", all)");
}

std::vector<SuiteResult> run_verify_all(std::uint64_t seed,
                                        const std::string& cli_path) {
  std::vector<SuiteResult> out;
  for (const auto& n : verify_suite_names())
    out.push_back(run_verify_suite(n, seed, cli_path));
  return out;
}

void print_suite_result(const SuiteResult& result, std::ostream& os) {
  int ok = 0;
  for (const auto& c : result.checks) ok += c.pass ? 1 : 0;
  os << "suite " << result.suite << ": " << (result.pass() ? "PASS" : "FAIL")
     << " (" << ok << "/" << result.checks.size() << " checks)\n";
  for (const auto& c : result.checks) {
    os << "  " << (c.pass ? "  ok " : "FAIL ") << c.name;
    if (!c.detail.empty()) os << " -- " << c.detail;
    os << "\n";
  }
}

}  // namespace bifurcat
