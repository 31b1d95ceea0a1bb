#include <doctest.h>

#include <cmath>

#include "bifurcat/common.hpp"
#include "bifurcat/model.hpp"
#include "bifurcat/ngm.hpp"
#include "bifurcat/recipes.hpp"
#include "util.hpp"

using namespace bifurcat;
using testutil::Rng;

TEST_CASE("spectral-radius R0 equals the closed forms") {
  Rng rng(301);
  for (const std::string id : {"brauer2d", "brauer3d", "martcheva5d", "hepc3d"}) {
    double worst = 0.0;
    const ModelSystem& m = builtin_model(id);
    for (int i = 0; i < 500; ++i) {
      const ParamMap p = testutil::draw_for(id, rng);
      const double closed = testutil::r0_closed(id, p);
      const double got = r0(m, p).r0;
      worst = std::max(worst, std::abs(got - closed) / (1.0 + std::abs(closed)));
    }
    CAPTURE(id);
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("R0 crosses one exactly where the DFE loses stability") {
  Rng rng(302);
  for (const std::string id : {"brauer2d", "brauer3d", "martcheva5d", "hepc3d"}) {
    const ModelSystem& m = builtin_model(id);
    int checked = 0;
    for (int i = 0; i < 200 && checked < 120; ++i) {
      const ParamMap p = testutil::draw_for(id, rng);
      const auto rep = r0(m, p);
      if (std::abs(rep.r0 - 1.0) < 1e-3) continue;  // skip the marginal band
      ++checked;
      CAPTURE(id);
      CAPTURE(rep.r0);
      if (rep.r0 < 1.0)
        CHECK(rep.dfe_stability == Stability::stable);
      else
        CHECK(rep.dfe_stability == Stability::unstable);
    }
    CHECK(checked >= 100);
  }
}

TEST_CASE("threshold solve places R0 at one") {
  Rng rng(303);
  struct Case {
    const char* id;
    const char* alpha1;
  } cases[] = {{"brauer2d", "beta"}, {"brauer3d", "beta"}, {"martcheva5d", "eta"},
               {"hepc3d", "rho"}};
  for (const auto& cs : cases) {
    const ModelSystem& m = builtin_model(cs.id);
    for (int i = 0; i < 25; ++i) {
      const ParamMap p = testutil::draw_for(cs.id, rng);
      const double t = alpha1_at_threshold(m, p, cs.alpha1);
      const double r = r0(m, p.with(cs.alpha1, t)).r0;
      CAPTURE(cs.id);
      CHECK(std::abs(r - 1.0) <= 1e-9);
    }
  }

  // At the threshold the DFE spectrum is marginal: max Re lambda ~ 0.
  const ParamMap p = testutil::draw_brauer2d(rng);
  const ModelSystem& m = builtin_model("brauer2d");
  const double bstar = alpha1_at_threshold(m, p, "beta");
  CHECK(dfe_stability(m, p.with("beta", bstar)) == Stability::marginal);
}

TEST_CASE("hepatitis threshold in delta matches the closed relation") {
  // The closed form solves R0 = 1 for the infected death rate directly.
  Rng rng(304);
  int solved = 0;
  for (int i = 0; i < 60 && solved < 40; ++i) {
    const ParamMap p = testutil::draw_hepc3d(rng);
    const auto d = hepc_delta_for_r0(p);
    if (!d) continue;
    ++solved;
    const double r = r0(builtin_model("hepc3d"), p.with("delta", *d)).r0;
    CHECK(std::abs(r - 1.0) <= 1e-9);
  }
  CHECK(solved >= 40);
}

TEST_CASE("singular transition block raises a numerics error") {
  // delta chosen so that delta - r_I (1 - p0/T_max) = 0 makes V singular.
  ParamMap p = testutil::hepc_degenerate_point();
  const auto q = hepc_dfe_quantities(p);
  const double shed = p.at("r_I") * (1.0 - q.p0 / p.at("T_max"));
  p.set("delta", shed);
  CHECK_THROWS_AS(r0(builtin_model("hepc3d"), p), NumericsError);
}

TEST_CASE("models without an infection/transition split refuse r0") {
  ModelSystem m = builtin_model("brauer2d");
  m.fv_split.reset();
  Rng rng(305);
  const ParamMap p = testutil::draw_brauer2d(rng);
  CHECK_THROWS_AS(r0(m, p), ModelError);
}
