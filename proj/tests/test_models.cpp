#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bifurcat/common.hpp"
#include "bifurcat/model.hpp"
#include "util.hpp"

using namespace bifurcat;
using testutil::Rng;

TEST_CASE("builtin catalog lists every model and rejects unknown ids") {
  const auto ids = builtin_model_ids();
  for (const char* id : {"brauer2d", "brauer3d", "martcheva5d", "hepc3d", "hepc3d_truncated"}) {
    CAPTURE(id);
    CHECK(std::find(ids.begin(), ids.end(), id) != ids.end());
    const ModelSystem& m = builtin_model(id);
    CHECK(m.id == id);
    CHECK(m.n == static_cast<int>(m.state_names.size()));
    CHECK(!m.infected_idx.empty());
  }
  CHECK_THROWS_AS(builtin_model("no_such_model"), UsageError);
}

TEST_CASE("the DFE annihilates the vector field") {
  Rng rng(101);
  for (const std::string id : {"brauer2d", "brauer3d", "martcheva5d", "hepc3d"}) {
    const ModelSystem& m = builtin_model(id);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const ParamMap p = testutil::draw_for(id, rng);
      const Vec x0 = m.dfe(p);
      const double r = inf_norm(m.eval(x0, p)) / (1.0 + p.max_abs());
      worst = std::max(worst, r);
      for (int k : m.infected_idx) CHECK(x0[k] == 0.0);
    }
    CAPTURE(id);
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("two-state model is the three-state model on the invariant plane") {
  // With Lambda = mu * K the plane S + I + V = K is invariant for the
  // three-state system, and the (I, V) dynamics restricted to it are exactly
  // the two-state system.
  Rng rng(102);
  const ModelSystem& m2 = builtin_model("brauer2d");
  const ModelSystem& m3 = builtin_model("brauer3d");
  for (int i = 0; i < 200; ++i) {
    ParamMap p2 = testutil::draw_brauer2d(rng);
    ParamMap p3 = p2;
    p3.set("Lambda", p2.at("mu") * p2.at("K"));
    const double K = p2.at("K");
    const double I = testutil::un(rng, 0.0, 1.0) * K;
    const double V = testutil::un(rng, 0.0, 1.0) * (K - I);
    Vec x2(2), x3(3);
    x2 << I, V;
    x3 << K - I - V, I, V;
    const Vec f2 = m2.eval(x2, p2);
    const Vec f3 = m3.eval(x3, p3);
    const double scale = 1.0 + inf_norm(f3);
    CHECK(std::abs(f2[0] - f3[1]) <= 1e-9 * scale);
    CHECK(std::abs(f2[1] - f3[2]) <= 1e-9 * scale);
    // Total population is conserved on the plane, so the three rates sum to 0.
    CHECK(std::abs(f3.sum()) <= 1e-9 * scale);
  }
}

TEST_CASE("the DFE depends only on demographic parameters") {
  Rng rng(103);
  const ModelSystem& mart = builtin_model("martcheva5d");
  const ModelSystem& b2 = builtin_model("brauer2d");
  for (int i = 0; i < 50; ++i) {
    {
      const ParamMap p = testutil::draw_martcheva5d(rng);
      const Vec x0 = mart.dfe(p);
      for (const char* k : {"beta", "eta", "delta", "D", "gamma", "sigma", "w"}) {
        const Vec x1 = mart.dfe(p.with(k, p.at(k) * 3.7));
        CAPTURE(k);
        CHECK(inf_norm(Vec(x1 - x0)) == 0.0);
      }
    }
    {
      const ParamMap p = testutil::draw_brauer2d(rng);
      const Vec x0 = b2.dfe(p);
      for (const char* k : {"beta", "gamma", "sigma"}) {
        const Vec x1 = b2.dfe(p.with(k, p.at(k) * 3.7));
        CAPTURE(k);
        CHECK(inf_norm(Vec(x1 - x0)) == 0.0);
      }
    }
  }
}

TEST_CASE("inadmissible parameters and domain violations raise errors") {
  const ModelSystem& b2 = builtin_model("brauer2d");
  Rng rng(104);
  ParamMap p = testutil::draw_brauer2d(rng);
  CHECK_THROWS_AS(b2.require_admissible(p.with("mu", -0.1)), ModelError);
  CHECK_THROWS_AS(b2.require_admissible(p.with("K", 0.0)), ModelError);

  ParamMap q = testutil::draw_hepc3d(rng);
  const ModelSystem& h = builtin_model("hepc3d");
  Vec bad(3);
  bad << 0.0, 0.0, 1.0;  // T + I = 0: the incidence denominator vanishes
  CHECK_THROWS_AS(h.eval(bad, q), ModelError);

  CHECK_THROWS_AS(p.at("nonexistent"), ModelError);

  // require_admissible names the missing parameter
  ParamMap partial(std::map<std::string, double>{{"K", 1.0}});
  CHECK_THROWS_WITH_AS(b2.require_admissible(partial),
                       doctest::Contains("missing parameter"), ModelError);
}

TEST_CASE("closed-form DFE quantities of the hepatitis model") {
  // At the reference point the uninfected rest state solves
  // s + r_T p (1 - p/T_max) - d p = 0 with p0 = 10 (sqrt(10) - 1) / ...;
  // the values below were computed from the closed form independently.
  const ParamMap p = testutil::hepc_degenerate_point();
  const auto q = hepc_dfe_quantities(p);
  CHECK(q.p0 == doctest::Approx(86.037961002806341).epsilon(1e-14));
  CHECK(q.a11 == doctest::Approx(3.1622776601683795).epsilon(1e-14));
  CHECK(q.a12 == doctest::Approx(2.58113883008419).epsilon(1e-14));
  CHECK(q.a22 == doctest::Approx(-0.8603796100280634).epsilon(1e-14));

  // p0 really is a rest point of the target-cell equation.
  const double res = p.at("s") + p.at("r_T") * q.p0 * (1.0 - q.p0 / p.at("T_max")) -
                     p.at("d") * q.p0;
  CHECK(std::abs(res) <= 1e-10 * (1.0 + q.p0));

  // With a positive source the interaction matrix is ordered a11 > a12 > 0.
  Rng rng(105);
  for (int i = 0; i < 200; ++i) {
    const ParamMap r = testutil::draw_hepc3d(rng);
    const auto qq = hepc_dfe_quantities(r);
    CHECK(qq.p0 > 0.0);
    if (r.at("s") > 0.0) {
      CHECK(qq.a11 > qq.a12);
      CHECK(qq.a12 > 0.0);
    }
  }
}

TEST_CASE("the truncated hepatitis model pins s = d = 0") {
  Rng rng(106);
  const ModelSystem& full = builtin_model("hepc3d");
  const ModelSystem& trunc = builtin_model("hepc3d_truncated");
  for (int i = 0; i < 50; ++i) {
    ParamMap p = testutil::draw_hepc3d(rng);
    ParamMap p00 = p;
    p00.set("s", 0.0);
    p00.set("d", 0.0);
    Vec x(3);
    x << testutil::lu(rng, 0.1, 50.0), testutil::lu(rng, 0.1, 50.0),
        testutil::lu(rng, 0.1, 50.0);
    // Truncated rhs ignores whatever s and d values the caller supplies.
    const Vec ft = trunc.eval(x, p);
    const Vec f0 = full.eval(x, p00);
    CHECK(inf_norm(Vec(ft - f0)) <= 1e-12 * (1.0 + inf_norm(f0)));
  }
}
