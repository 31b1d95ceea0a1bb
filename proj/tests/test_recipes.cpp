#include <doctest.h>

#include <cmath>
#include <map>

#include "bifurcat/bifcoeffs.hpp"
#include "bifurcat/common.hpp"
#include "bifurcat/model.hpp"
#include "bifurcat/ngm.hpp"
#include "bifurcat/recipes.hpp"
#include "util.hpp"

using namespace bifurcat;
using testutil::Rng;

TEST_CASE("hepatitis F expression and the threshold relations") {
  const ParamMap base = testutil::hepc_degenerate_point();

  // F recomputed from first principles on random draws.
  Rng rng(701);
  for (int i = 0; i < 100; ++i) {
    const ParamMap p = testutil::draw_hepc3d(rng);
    const auto q = hepc_dfe_quantities(p);
    const double manual = (p.at("b") + p.at("c")) * p.at("r_I") * q.p0 /
                              (q.a11 * p.at("T_max")) -
                          p.at("c");
    CHECK(hepc_F(p) == doctest::Approx(manual).epsilon(1e-12));
  }

  // The construction point sits firmly in the backward regime.
  CHECK(hepc_F(base) > 0.0);

  // r_I from the degeneracy relation reproduces the frozen value, and the
  // relation goes infeasible when rho drops below its floor.
  {
    ParamMap p = base;
    p.set("r_I", 1.0);  // r_I is the unknown here
    const auto rI = hepc_rI_for_a0(p);
    REQUIRE(rI.has_value());
    CHECK(*rI == doctest::Approx(7.8759528849926541).epsilon(1e-12));

    const auto q = hepc_dfe_quantities(p);
    const double rho_min = (p.at("b") + p.at("c")) * (q.a11 - q.a12) /
                           (p.at("b") * p.at("R_star"));
    CHECK(p.at("rho") == doctest::Approx(1.25 * rho_min).epsilon(1e-12));
    CHECK_FALSE(hepc_rI_for_a0(p.with("rho", 0.9 * rho_min)).has_value());
  }

  // delta from the threshold relation reproduces the frozen value; a source
  // pushing the rest state past the carrying capacity makes it infeasible.
  {
    ParamMap p = base;
    p.set("delta", 1.0);
    const auto de = hepc_delta_for_r0(p);
    REQUIRE(de.has_value());
    CHECK(*de == doctest::Approx(1.8260671508085102).epsilon(1e-12));

    ParamMap over = p;
    over.set("s", 2.0 * p.at("d") * p.at("T_max"));  // p0 > T_max now
    CHECK_FALSE(hepc_delta_for_r0(over).has_value());
  }
}

TEST_CASE("sign of F decides forward versus backward at the threshold") {
  Rng rng(702);
  const ModelSystem& m = builtin_model("hepc3d");
  int backward_checked = 0, forward_checked = 0;
  for (int i = 0; i < 200 && (backward_checked < 10 || forward_checked < 10); ++i) {
    ParamMap p = testutil::draw_hepc3d(rng);
    const double F = hepc_F(p);
    if (std::abs(F) < 1e-3) continue;
    if (F > 0.0) {
      // Backward needs rho above the a = 0 locus; place it at twice that.
      const auto q = hepc_dfe_quantities(p);
      const double rho_a0 = (p.at("b") + p.at("c")) * (p.at("b") + p.at("c")) *
                            (q.a11 - q.a12) * p.at("r_I") * q.p0 /
                            (p.at("T_max") * p.at("b") * p.at("R_star") * q.a11 * F);
      if (rho_a0 <= 0.0) continue;
      p.set("rho", 2.0 * rho_a0);
    }
    const auto de = hepc_delta_for_r0(p);
    if (!de) continue;
    p.set("delta", *de);
    CenterCoefficients C;
    try {
      C = coefficients(m, p, "rho", "");
    } catch (const NumericsError&) {
      continue;  // e.g. non-simple spectrum on an extreme draw
    }
    if (std::abs(C.a) <= 1e-6 * C.a_scale) continue;
    CAPTURE(i);
    CHECK((C.a > 0.0) == (F > 0.0));
    if (F > 0.0)
      ++backward_checked;
    else
      ++forward_checked;

    // Closed-form b in the normalized chart.
    const double b = p.at("b"), c = p.at("c");
    const double mt = p.at("rho") * p.at("R_star");
    const double b_closed = b * p.at("R_star") * (b + c) / ((b + c) * (b + c) + b * mt);
    CHECK(C.b == doctest::Approx(b_closed).epsilon(1e-6));
  }
  CHECK(backward_checked >= 10);
  CHECK(forward_checked >= 10);
}

TEST_CASE("cholera eta threshold closed form") {
  Rng rng(703);
  const ModelSystem& m = builtin_model("martcheva5d");
  for (int i = 0; i < 50; ++i) {
    const ParamMap p = testutil::draw_martcheva5d(rng);
    const double eta = martcheva_eta_for_r0(p);
    CHECK(std::abs(r0(m, p.with("eta", eta)).r0 - 1.0) <= 1e-10);
  }
  ParamMap ref = testutil::martcheva_degenerate_point();
  ref.set("eta", 1.0);
  CHECK(martcheva_eta_for_r0(ref) == doctest::Approx(88.544158380651623).epsilon(1e-12));
}

TEST_CASE("cholera construction: degenerate threshold with a two-state wedge") {
  const RecipeReport rep = theorem2_construct();
  CHECK(rep.pass);

  for (const char* name :
       {"base: |R0 - 1| <= 1e-8", "base: |a| within tolerance", "base: c < 0",
        "base: |e| above tolerance (alpha2 = D)",
        "alpha2 = D: manifold-corrected slope vanishes",
        "perturbed: exactly two positive steady states",
        "perturbed: one stable and one unstable state", "perturbed: R0 < 1"}) {
    const CheckItem* item = rep.find(name);
    CAPTURE(name);
    REQUIRE(item != nullptr);
    CHECK(item->pass);
  }

  REQUIRE(rep.coeffs.has_value());
  CHECK(rep.coeffs->a_is_zero());
  CHECK(rep.coeffs->c < 0.0);
  REQUIRE(rep.perturbed.has_value());
  REQUIRE(rep.perturbed_states.size() >= 2);

  int stable = 0, unstable = 0;
  for (const auto& s : rep.perturbed_states) {
    if (s.positivity != Positivity::positive) continue;
    if (s.stability == "stable") ++stable;
    if (s.stability == "unstable") ++unstable;
  }
  CHECK(stable == 1);
  CHECK(unstable == 1);
}

TEST_CASE("hepatitis construction: degenerate threshold with fold continuation") {
  const RecipeReport rep = theorem4_construct();
  CHECK(rep.pass);

  for (const char* name :
       {"base: |R0 - 1| <= 1e-8", "base: |a| within tolerance", "base: c < 0",
        "base: |e| above tolerance (alpha2 = r_I)", "base: fuualpha1 = 0",
        "base: c from quadratic+cubic split (1e-5 relative)",
        "perturbed: exactly two positive steady states",
        "perturbed: parity audit counts two positive states",
        "continuation: exactly one fold on the connecting branch",
        "continuation: fold location matches the reduction bisection",
        "continuation: non-critical eigenvalues negative at the fold",
        "continuation: fold parabola ratio spread < 2",
        "continuation: branch reconnects to the stable state"}) {
    const CheckItem* item = rep.find(name);
    CAPTURE(name);
    REQUIRE(item != nullptr);
    CHECK(item->pass);
  }

  REQUIRE(rep.coeffs.has_value());
  CHECK(rep.coeffs->e_nonzero_sufficient);
}

TEST_CASE("truncated continuum: family residuals and the coefficient split") {
  ParamMap p(std::map<std::string, double>{
      {"R_star", 1.0}, {"T_max", 100.0}, {"b", 1.2}, {"c", 0.9}, {"d", 0.0},
      {"r_T", 3.0}, {"s", 0.0}, {"rho", 1.0}, {"r_I", 1.2857142857142858},
      {"delta", 0.5714285714285714}});
  const RecipeReport rep = truncated_continuum_verify(p, 50);
  CHECK(rep.pass);
  for (const char* name : {"family: scaled rhs residual on the X grid", "c(2) + c(3) = 0",
                           "pipeline c vanishes at the continuum point"}) {
    const CheckItem* item = rep.find(name);
    CAPTURE(name);
    REQUIRE(item != nullptr);
    CHECK(item->pass);
  }
}

TEST_CASE("truncated linear classification A X = B against enumeration") {
  auto base = [](double delta, double r_I) {
    return ParamMap(std::map<std::string, double>{
        {"R_star", 1.0}, {"T_max", 100.0}, {"b", 1.2}, {"c", 0.9}, {"d", 0.0},
        {"r_T", 3.0}, {"s", 0.0}, {"rho", 1.0}, {"r_I", r_I}, {"delta", delta}});
  };
  struct Case {
    double delta, r_I;
    TruncatedRootClass cls;
  } cases[] = {{0.7, 2.5, TruncatedRootClass::unique_positive},
               {0.1, 0.2, TruncatedRootClass::unique_positive},
               {1.5, 0.5, TruncatedRootClass::none},
               {0.5714285714285714, 1.2857142857142858, TruncatedRootClass::continuum}};
  for (const auto& cs : cases) {
    const auto rep = truncated_unique_root(base(cs.delta, cs.r_I));
    CAPTURE(cs.delta);
    CAPTURE(cs.r_I);
    CHECK(rep.cls == cs.cls);
    CHECK(rep.consistent);
    if (cs.cls == TruncatedRootClass::unique_positive) CHECK(rep.enumerated_positive == 1);
    if (cs.cls == TruncatedRootClass::none) CHECK(rep.enumerated_positive == 0);
    if (cs.cls == TruncatedRootClass::continuum) CHECK(rep.enumerated_positive >= 2);
  }
  CHECK(to_string(TruncatedRootClass::continuum) == "continuum");
}
