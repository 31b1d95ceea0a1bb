#include "bifurcat/ngm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <limits>

#include "bifurcat/numdiff.hpp"

namespace bifurcat {

std::string to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::marginal: return "marginal";
  }
  return "marginal";
}

double spectral_margin(const Mat& J) { return 1e-8 * (1.0 + inf_norm(J)); }

namespace {

double spectral_radius(const Mat& K) {
  if (K.rows() == 1) return std::abs(K(0, 0));
  if (K.rows() == 2) {
    const double t = K(0, 0) + K(1, 1);
    const double det = K(0, 0) * K(1, 1) - K(0, 1) * K(1, 0);
    const double disc = t * t / 4.0 - det;
    if (disc >= 0.0) {
      const double r = std::sqrt(disc);
      return std::max(std::abs(t / 2.0 + r), std::abs(t / 2.0 - r));
    }
    return std::sqrt(det);  // complex conjugate pair
  }
  Eigen::EigenSolver<Mat> es(K);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Jacobian of an infected-block map: non-infected coordinates stay frozen at
// the DFE, infected ones vary.
Mat infected_jacobian(const std::function<Vec(const Vec&, const ParamMap&)>& part,
                      const ModelSystem& model, const ParamMap& params,
                      const Vec& x0) {
  const int m = model.num_infected();
  Vec y0(m);
  for (int i = 0; i < m; ++i) y0[i] = x0[model.infected_idx[i]];
  VecFn g = [&](const Vec& y) {
    Vec x = x0;
    for (int i = 0; i < m; ++i) x[model.infected_idx[i]] = y[i];
    return part(x, params);
  };
  return jacobian(g, y0);
}

Stability classify_margin(double max_re, double margin) {
  if (std::abs(max_re) <= margin) return Stability::marginal;
  return max_re < 0.0 ? Stability::stable : Stability::unstable;
}

}  // namespace

R0Report r0(const ModelSystem& model, const ParamMap& params) {
  if (!model.fv_split)
    throw ModelError(model.id + ": model provides no new-infection/transition split");
  model.require_admissible(params);
  const Vec x0 = model.dfe(params);

  R0Report out;
  out.F = infected_jacobian(model.fv_split->gain, model, params, x0);
  out.V = infected_jacobian(model.fv_split->loss, model, params, x0);

  Eigen::FullPivLU<Mat> lu(out.V);
  // FD-computed entries carry ~1e-12 noise, so an exactly singular transition
  // block must be detected with a relative pivot threshold well above that.
  lu.setThreshold(1e-9);
  if (!lu.isInvertible())
    throw NumericsError(model.id + ": transition matrix not invertible");
  out.r0 = spectral_radius(out.F * lu.inverse());

  const Mat J = jacobian(model, x0, params);
  Eigen::EigenSolver<Mat> es(J);
  out.dfe_eigenvalues = es.eigenvalues();
  out.dfe_stability =
      classify_margin(out.dfe_eigenvalues.real().maxCoeff(), spectral_margin(J));
  return out;
}

double alpha1_at_threshold(const ModelSystem& model, const ParamMap& params,
                           const std::string& alpha1) {
  auto g = [&](double t) -> double {
    try {
      return r0(model, params.with(alpha1, t)).r0 - 1.0;
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  const double t0 = params.at(alpha1);
  const double g0 = g(t0);
  if (!std::isfinite(g0))
    throw NumericsError(model.id + ": r0 undefined at the current " + alpha1);
  // For transmission-like parameters r0 is proportional to alpha1, so the
  // rescaled value is often already the crossing.
  double guess = t0;
  if (g0 + 1.0 > 0.0) guess = t0 / (g0 + 1.0);
  if (std::abs(g(guess)) <= 1e-13) return guess;

  // Geometric ladder around the guess; take the sign change nearest to it.
  double lo = 0.0, hi = 0.0;
  bool have_bracket = false;
  double t_prev = guess * std::pow(1.5, -40);
  double g_prev = g(t_prev);
  for (int i = -39; i <= 40; ++i) {
    const double t = guess * std::pow(1.5, i);
    const double gt = g(t);
    if (std::isfinite(g_prev) && std::isfinite(gt) && g_prev * gt <= 0.0) {
      lo = t_prev;
      hi = t;
      have_bracket = true;
      if (t >= guess) break;  // first bracket at/after the guess is the nearest
    }
    t_prev = t;
    g_prev = gt;
  }
  if (!have_bracket)
    throw NumericsError(model.id + ": no R0 = 1 crossing found in " + alpha1);

  double g_lo = g(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = g(mid);
    if (g_mid == 0.0 || std::abs(hi - lo) <= 4e-16 * (std::abs(lo) + std::abs(hi)))
      return mid;
    if ((g_mid < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Stability dfe_stability(const ModelSystem& model, const ParamMap& params) {
  model.require_admissible(params);
  const Vec x0 = model.dfe(params);
  const Mat J = jacobian(model, x0, params);
  Eigen::EigenSolver<Mat> es(J);
  return classify_margin(es.eigenvalues().real().maxCoeff(), spectral_margin(J));
}

}  // namespace bifurcat
