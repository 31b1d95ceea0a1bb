#include <doctest.h>

#include <cmath>

#include "bifurcat/bifcoeffs.hpp"
#include "bifurcat/common.hpp"
#include "bifurcat/model.hpp"
#include "bifurcat/model_parse.hpp"
#include "bifurcat/recipes.hpp"
#include "bifurcat/steadystate.hpp"
#include "util.hpp"

using namespace bifurcat;
using testutil::Rng;

TEST_CASE("hepatitis degenerate point: full coefficient pipeline") {
  const ModelSystem& m = builtin_model("hepc3d");
  const ParamMap p = testutil::hepc_degenerate_point();
  const CenterCoefficients C = coefficients(m, p, "rho", "r_I");

  CHECK(C.a_is_zero());
  CHECK(C.a_scale > 0.0);
  CHECK(C.b == doctest::Approx(0.42456482).epsilon(1e-6));
  CHECK(C.c == doctest::Approx(-1.19146693e-4).epsilon(1e-5));
  CHECK(C.d == doctest::Approx(6.82703e-4).epsilon(1e-4));
  CHECK(C.e == doctest::Approx(2.86497).epsilon(1e-4));
  CHECK(std::abs(C.fuualpha1) <= 1e-9);
  CHECK(C.e_nonzero_sufficient);
  CHECK(C.e_is_nonzero());
  CHECK(C.e_corrected == doctest::Approx(-14.4827).epsilon(1e-3));

  // Null-pair quality: both residuals well under the advertised bound.
  const double bound = 1e-10 * (1.0 + inf_norm(C.null.A));
  CHECK(C.null.residual_w <= bound);
  CHECK(C.null.residual_v <= bound);

  const BifClass cls = classify(C);
  CHECK(cls.a_zero);
  CHECK(cls.primary == "unfolded-backward");
  bool has_flag = false;
  for (const auto& f : cls.flags) has_flag = has_flag || f == "two-states-below-threshold";
  CHECK(has_flag);
}

TEST_CASE("cholera degenerate point: coefficients and the clearance conjugacy") {
  const ModelSystem& m = builtin_model("martcheva5d");
  const ParamMap p = testutil::martcheva_degenerate_point();

  const CenterCoefficients CD = coefficients(m, p, "eta", "D");
  CHECK(CD.a_is_zero());
  CHECK(CD.a_scale > 0.01);  // entry-level mass stays O(0.1) despite a ~ 1e-14
  CHECK(CD.b == doctest::Approx(0.0164482375).epsilon(1e-6));
  CHECK(CD.c == doctest::Approx(-0.0957743554).epsilon(1e-6));
  CHECK(CD.e == doctest::Approx(0.152065).epsilon(1e-4));
  // A clearance perturbation is conjugate to a transmission rescaling: the
  // manifold-corrected unfolding slope cancels to zero.
  CHECK(std::abs(CD.e_corrected) <= 1e-6);

  const CenterCoefficients Cw = coefficients(m, p, "eta", "w");
  CHECK(Cw.e_corrected == doctest::Approx(1.0645).epsilon(1e-3));
}

TEST_CASE("null pair matches the closed-form eigenvectors (hepatitis)") {
  const ModelSystem& m = builtin_model("hepc3d");
  const ParamMap p = testutil::hepc_degenerate_point();
  const NullPair np = null_pair(m, p);
  const auto q = hepc_dfe_quantities(p);
  const double b = p.at("b"), c = p.at("c"), mt = p.at("rho") * p.at("R_star");

  // v is proportional to (0, b+c, b).
  CHECK(std::abs(np.v[0]) <= 1e-8 * inf_norm(np.v));
  CHECK(np.v[2] / np.v[1] == doctest::Approx(b / (b + c)).epsilon(1e-6));

  // w is proportional to (-a12 (b+c) - b mt, a11 (b+c), a11 mt), normalized
  // so its largest infected component is one.
  Vec ref(3);
  ref << -q.a12 * (b + c) - b * mt, q.a11 * (b + c), q.a11 * mt;
  ref /= ref[1];  // I is the largest infected component here
  CHECK(np.w[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(np.w[0] == doctest::Approx(ref[0]).epsilon(1e-6));
  CHECK(np.w[2] == doctest::Approx(ref[2]).epsilon(1e-6));
}

TEST_CASE("null pair matches the closed-form eigenvectors (three-state staged)") {
  Rng rng(401);
  const ModelSystem& m = builtin_model("brauer3d");
  for (int i = 0; i < 25; ++i) {
    ParamMap p = testutil::draw_brauer3d(rng);
    p.set("beta", testutil::brauer_beta_star(p, true));
    const NullPair np = null_pair(m, p);
    const Vec x0 = m.dfe(p);
    const double E = (p.at("gamma") - p.at("beta") * x0[0] - p.at("theta")) /
                     (p.at("mu") + p.at("phi") + p.at("theta"));
    // v ~ (0, 1, 0): the reduced equation lives on the infected row.
    CHECK(std::abs(np.v[0]) <= 1e-7 * inf_norm(np.v));
    CHECK(std::abs(np.v[2]) <= 1e-7 * inf_norm(np.v));
    // w ~ (E, 1, -1-E) with the infected component pinned to one.
    CHECK(np.w[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(np.w[0] == doctest::Approx(E).epsilon(1e-5));
    CHECK(np.w[2] == doctest::Approx(-1.0 - E).epsilon(1e-5));
  }
}

TEST_CASE("coefficient a agrees in sign with the quadratic-reduction middle term") {
  Rng rng(402);
  const ModelSystem& m = builtin_model("brauer2d");
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    ParamMap p = testutil::draw_brauer2d(rng);
    p.set("beta", testutil::brauer_beta_star(p, false));
    const CenterCoefficients C = coefficients(m, p, "beta", "");
    if (std::abs(C.a) <= 1e-6 * C.a_scale) continue;  // skip near-degeneracies
    const auto quad = brauer_quadratic(p);
    const double a1 = quad.coeffs[1];
    const double qscale = std::abs(quad.coeffs[0]) + std::abs(quad.coeffs[2]);
    if (std::abs(a1) <= 1e-9 * (1.0 + qscale)) continue;
    const double sign_expr = brauer_backward_test(p);
    ++checked;
    CAPTURE(i);
    CHECK((C.a > 0.0) == (a1 < 0.0));
    CHECK((C.a > 0.0) == (sign_expr < 0.0));
  }
  CHECK(checked >= 250);
}

TEST_CASE("coefficient a agrees in sign with the cholera sign expression") {
  Rng rng(403);
  const ModelSystem& m = builtin_model("martcheva5d");
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    ParamMap p = testutil::draw_martcheva5d(rng);
    p.set("eta", martcheva_eta_for_r0(p));
    const CenterCoefficients C = coefficients(m, p, "eta", "");
    const double expr = martcheva_a1_sign(p);
    if (std::abs(C.a) <= 1e-6 * C.a_scale) continue;  // near the a = 0 set
    ++checked;
    CAPTURE(i);
    CHECK((C.a > 0.0) == (expr > 0.0));
  }
  CHECK(checked >= 150);
}

TEST_CASE("c is invariant under kernel-direction shifts of the pseudo-solve") {
  for (const bool hep : {true, false}) {
    const ModelSystem& m = builtin_model(hep ? "hepc3d" : "martcheva5d");
    const ParamMap p =
        hep ? testutil::hepc_degenerate_point() : testutil::martcheva_degenerate_point();
    const double c0 = coeff_c(m, p);
    const double c1 = coeff_c_shifted(m, p, 0.37);
    const double bound = 1e-7 * std::abs(c0) + 1e-10;
    CAPTURE(hep);
    CHECK(std::abs(c1 - c0) <= bound);

    const CenterCoefficients C = coefficients(m, p, hep ? "rho" : "eta", "");
    CHECK(C.c_kernel_sensitivity <= bound);
  }
}

TEST_CASE("error paths carry their documented messages") {
  Rng rng(404);

  // a != 0 makes c ill-defined.
  {
    const ModelSystem& m = builtin_model("hepc3d");
    bool exercised = false;
    for (int i = 0; i < 40 && !exercised; ++i) {
      ParamMap p = testutil::draw_hepc3d(rng);
      const auto d = hepc_delta_for_r0(p);
      if (!d) continue;
      p.set("delta", *d);
      if (std::abs(coeff_a(m, p)) <= 1e-6) continue;  // want a decisively nonzero
      CHECK_THROWS_WITH_AS(coeff_c(m, p), doctest::Contains("c ill-defined"),
                           NumericsError);
      exercised = true;
    }
    CHECK(exercised);
  }

  // A bifurcation parameter that moves the DFE is rejected.
  {
    const ModelSystem& m = builtin_model("martcheva5d");
    const ParamMap p = testutil::martcheva_degenerate_point();
    CHECK_THROWS_WITH_AS(coeff_b(m, p, "psi"),
                         doctest::Contains("invalid bifurcation parameter"),
                         NumericsError);
  }

  // Away from the threshold there is no near-zero eigenvalue.
  {
    const ModelSystem& m = builtin_model("brauer2d");
    ParamMap p = testutil::draw_brauer2d(rng);
    p.set("beta", 0.5 * testutil::brauer_beta_star(p, false));
    CHECK_THROWS_WITH_AS(null_pair(m, p), doctest::Contains("no near-zero eigenvalue"),
                         NumericsError);
  }

  // A two-dimensional kernel is refused as non-simple.
  {
    const ModelSystem dz = parse_model_text(
        "model doublezero\n"
        "state x y\n"
        "infected x y\n"
        "param a\n"
        "rhs x = a*x*y\n"
        "rhs y = a*x*y\n"
        "dfe x = 0\n"
        "dfe y = 0\n");
    ParamMap p(std::map<std::string, double>{{"a", 1.0}});
    CHECK_THROWS_WITH_AS(null_pair(dz, p), doctest::Contains("non-simple zero eigenvalue"),
                         NumericsError);
  }

  // On the continuum set c degenerates and e is undefined.
  {
    const ModelSystem& m = builtin_model("hepc3d_truncated");
    ParamMap p(std::map<std::string, double>{
        {"R_star", 1.0}, {"T_max", 100.0}, {"b", 1.2}, {"c", 0.9}, {"d", 0.0},
        {"r_T", 3.0}, {"s", 0.0}, {"rho", 1.0}, {"r_I", 1.2857142857142858},
        {"delta", 0.5714285714285714}});
    CHECK_THROWS_WITH_AS(coeff_e(m, p, "rho", "r_I"),
                         doctest::Contains("e undefined"), NumericsError);
  }

  // The classifier refuses a non-positive b.
  {
    CenterCoefficients C;
    C.b = -1.0;
    CHECK_THROWS_WITH_AS(classify(C), doctest::Contains("hypothesis violated"),
                         NumericsError);
  }
}

TEST_CASE("classifier label table") {
  CenterCoefficients C;
  C.b = 1.0;
  C.a_scale = 1.0;

  C.a = 0.5;
  CHECK(classify(C).primary == "backward");
  C.a = -0.5;
  CHECK(classify(C).primary == "forward");

  C.a = 0.0;  // a_is_zero now true
  C.c = -1.0;
  C.d = 1.0;
  C.e = 0.5;
  CHECK(classify(C).primary == "unfolded-backward");
  C.c = 1.0;
  C.e = -0.5;
  CHECK(classify(C).primary == "unfolded-backward");
  C.e = 0.5;
  CHECK(classify(C).primary == "unfolded-forward");
  C.e = 1e-9;  // below tol_e
  CHECK(classify(C).primary == "degenerate");
}

TEST_CASE("empty alpha2 leaves the unfolding half of the pipeline at zero") {
  const ModelSystem& m = builtin_model("hepc3d");
  const ParamMap p = testutil::hepc_degenerate_point();
  const CenterCoefficients C = coefficients(m, p, "rho", "");
  CHECK(C.d == 0.0);
  CHECK(C.e == 0.0);
  CHECK(C.e_corrected == 0.0);
  CHECK(C.alpha2.empty());
  CHECK(C.b == doctest::Approx(0.42456482).epsilon(1e-6));
}
