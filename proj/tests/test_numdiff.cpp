#include <doctest.h>

#include <cmath>

#include "bifurcat/common.hpp"
#include "bifurcat/model.hpp"
#include "bifurcat/numdiff.hpp"
#include "util.hpp"

using namespace bifurcat;
using testutil::Rng;
using testutil::unit;

TEST_CASE("hepatitis-model derivative stencils match hand-computed values") {
  const ModelSystem& m = builtin_model("hepc3d");
  const ParamMap p = testutil::hepc_degenerate_point();
  const Vec x0 = m.dfe(p);
  const auto q = hepc_dfe_quantities(p);
  const double rI = p.at("r_I"), Tm = p.at("T_max"), b = p.at("b");
  const Vec eT = unit(3, 0), eI = unit(3, 1), eV = unit(3, 2);

  // Second derivatives of the logistic proliferation term in the I row.
  CHECK(d2f(m, x0, p, eT, eI)[1] == doctest::Approx(-rI / Tm).epsilon(1e-7));
  CHECK(d2f(m, x0, p, eI, eI)[1] == doctest::Approx(-2.0 * rI / Tm).epsilon(1e-7));

  // Third derivatives of the frequency-dependent incidence b T V / (T + I).
  CHECK(d3f(m, x0, p, eI, eI, eV)[1] ==
        doctest::Approx(2.0 * b / (q.p0 * q.p0)).epsilon(1e-5));
  CHECK(d3f(m, x0, p, eT, eI, eV)[1] ==
        doctest::Approx(b / (q.p0 * q.p0)).epsilon(1e-5));
  CHECK(std::abs(d3f(m, x0, p, eT, eT, eV)[1]) <= 1e-9);

  // Mixed state-parameter derivative of the production term rho R* I.
  const Vec dp = d2f_param(m, x0, p, eI, "rho");
  CHECK(std::abs(dp[0]) <= 1e-9);
  CHECK(std::abs(dp[1]) <= 1e-9);
  CHECK(dp[2] == doctest::Approx(p.at("R_star")).epsilon(1e-8));
}

TEST_CASE("staged-protection model derivatives: quadratic rhs has zero d3f") {
  Rng rng(201);
  const ModelSystem& m = builtin_model("brauer3d");
  for (int i = 0; i < 25; ++i) {
    const ParamMap p = testutil::draw_brauer3d(rng);
    const Vec x0 = m.dfe(p);
    Vec u1(3), u2(3), u3(3);
    for (int k = 0; k < 3; ++k) {
      u1[k] = testutil::un(rng, -1.0, 1.0);
      u2[k] = testutil::un(rng, -1.0, 1.0);
      u3[k] = testutil::un(rng, -1.0, 1.0);
    }
    const double scale = 1.0 + inf_norm(jacobian(m, x0, p));
    CHECK(inf_norm(d3f(m, x0, p, u1, u2, u3)) <= 1e-5 * scale);
  }

  // beta-sensitivity of the incidence: d2/dI dbeta of the I row is S0+sigma V0.
  const ParamMap p = testutil::draw_brauer3d(rng);
  const Vec x0 = m.dfe(p);
  const Vec d = d2f_param(m, x0, p, unit(3, 1), "beta");
  CHECK(d[1] == doctest::Approx(x0[0] + p.at("sigma") * x0[2]).epsilon(1e-7));
}

TEST_CASE("d2f and d3f are symmetric and multilinear") {
  Rng rng(202);
  const ModelSystem& m = builtin_model("martcheva5d");
  for (int i = 0; i < 10; ++i) {
    const ParamMap p = testutil::draw_martcheva5d(rng);
    Vec x = m.dfe(p);
    for (int k = 0; k < 5; ++k) x[k] += testutil::un(rng, 0.01, 0.5);  // off the DFE
    Vec u1(5), u2(5), u3(5);
    for (int k = 0; k < 5; ++k) {
      u1[k] = testutil::un(rng, -1.0, 1.0);
      u2[k] = testutil::un(rng, -1.0, 1.0);
      u3[k] = testutil::un(rng, -1.0, 1.0);
    }

    const Vec a12 = d2f(m, x, p, u1, u2);
    const Vec a21 = d2f(m, x, p, u2, u1);
    const double s2 = 1.0 + inf_norm(a12);
    CHECK(inf_norm(Vec(a12 - a21)) <= 1e-6 * s2);

    const Vec t123 = d3f(m, x, p, u1, u2, u3);
    const Vec t312 = d3f(m, x, p, u3, u1, u2);
    const Vec t231 = d3f(m, x, p, u2, u3, u1);
    const double s3 = 1.0 + inf_norm(t123);
    CHECK(inf_norm(Vec(t123 - t312)) <= 2e-5 * s3);
    CHECK(inf_norm(Vec(t123 - t231)) <= 2e-5 * s3);

    // Linearity in the first slot.
    const double al = 0.7, be = -1.3;
    const Vec lhs = d2f(m, x, p, Vec(al * u1 + be * u2), u3);
    const Vec rhs = al * d2f(m, x, p, u1, u3) + be * d2f(m, x, p, u2, u3);
    CHECK(inf_norm(Vec(lhs - rhs)) <= 1e-5 * (1.0 + inf_norm(rhs)));
  }
}

TEST_CASE("zero directions short-circuit to exact zero vectors") {
  const ModelSystem& m = builtin_model("hepc3d");
  const ParamMap p = testutil::hepc_degenerate_point();
  const Vec x0 = m.dfe(p);
  const Vec z = Vec::Zero(3), e = unit(3, 1);
  CHECK(d2f(m, x0, p, z, e).isZero(0.0));
  CHECK(d2f(m, x0, p, e, z).isZero(0.0));
  CHECK(d3f(m, x0, p, z, e, e).isZero(0.0));
  CHECK(d3f(m, x0, p, e, z, e).isZero(0.0));
  CHECK(d3f(m, x0, p, e, e, z).isZero(0.0));
  CHECK(d2f_param(m, x0, p, z, "rho").isZero(0.0));
  CHECK(d3f_param(m, x0, p, z, e, "rho").isZero(0.0));
}

TEST_CASE("affine maps: exact jacobian, vanishing higher derivatives") {
  Mat M(3, 3);
  M << 2.0, -1.0, 0.5, 0.0, 3.0, -2.0, 1.0, 1.0, 1.0;
  Vec c(3);
  c << 0.3, -0.7, 2.0;
  const VecFn f = [&](const Vec& x) { return Vec(M * x + c); };
  Vec x(3);
  x << 0.4, -1.2, 2.5;
  const double scale = 1.0 + inf_norm(M);
  CHECK(inf_norm(Mat(jacobian(f, x) - M)) <= 1e-8 * scale);
  Vec u(3), v(3), w(3);
  u << 1.0, 2.0, -1.0;
  v << 0.5, -0.5, 0.25;
  w << -2.0, 1.0, 3.0;
  CHECK(inf_norm(d2f(f, x, u, v)) <= 1e-7 * scale);
  CHECK(inf_norm(d3f(f, x, u, v, w)) <= 1e-5 * scale);
}

TEST_CASE("jacobian at the DFE matches the closed two-state form") {
  Rng rng(203);
  const ModelSystem& m = builtin_model("brauer2d");
  for (int i = 0; i < 50; ++i) {
    const ParamMap p = testutil::draw_brauer2d(rng);
    const Vec x0 = m.dfe(p);
    const double S0 = p.at("K") - x0[1];
    const Mat J = jacobian(m, x0, p);
    const double scale = 1.0 + inf_norm(J);
    CHECK(std::abs(J(0, 0) - (p.at("beta") * (S0 + p.at("sigma") * x0[1]) -
                              p.at("mu") - p.at("gamma"))) <= 1e-7 * scale);
    CHECK(std::abs(J(0, 1)) <= 1e-7 * scale);
    CHECK(std::abs(J(1, 0) - (-(p.at("phi") + p.at("sigma") * p.at("beta") * x0[1]))) <=
          1e-7 * scale);
    CHECK(std::abs(J(1, 1) - (-(p.at("phi") + p.at("mu") + p.at("theta")))) <=
          1e-7 * scale);
  }
}

TEST_CASE("scalar-parameter derivative of a vector map") {
  const std::function<Vec(double)> g = [](double t) {
    Vec out(2);
    out << std::sin(t), t * t;
    return out;
  };
  const Vec d = dparam(g, 0.7, 1.0);
  CHECK(d[0] == doctest::Approx(std::cos(0.7)).epsilon(1e-9));
  CHECK(d[1] == doctest::Approx(1.4).epsilon(1e-9));
}
