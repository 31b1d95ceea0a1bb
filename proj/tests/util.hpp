#pragma once

// Shared helpers for the test binaries: deterministic random parameter draws
// for every built-in model family and the closed-form reproduction numbers
// they are checked against.

#include <cmath>
#include <map>
#include <random>
#include <string>

#include "bifurcat/model.hpp"

namespace testutil {

using bifurcat::ParamMap;
using bifurcat::Vec;
using Rng = std::mt19937_64;

inline double lu(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
  return std::exp(d(rng));
}

inline double un(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

inline Vec unit(int n, int k) {
  Vec e = Vec::Zero(n);
  e[k] = 1.0;
  return e;
}

inline ParamMap draw_brauer2d(Rng& rng) {
  return ParamMap(std::map<std::string, double>{
      {"K", lu(rng, 1.0, 100.0)}, {"beta", lu(rng, 0.005, 1.0)},
      {"gamma", lu(rng, 0.05, 2.0)}, {"mu", lu(rng, 0.02, 1.0)},
      {"phi", lu(rng, 0.05, 2.0)}, {"sigma", un(rng, 0.05, 0.95)},
      {"theta", lu(rng, 0.02, 1.0)}});
}

inline ParamMap draw_brauer3d(Rng& rng) {
  return ParamMap(std::map<std::string, double>{
      {"Lambda", lu(rng, 0.2, 10.0)}, {"beta", lu(rng, 0.002, 0.5)},
      {"gamma", lu(rng, 0.05, 2.0)}, {"mu", lu(rng, 0.05, 1.0)},
      {"phi", lu(rng, 0.05, 2.0)}, {"sigma", un(rng, 0.05, 0.95)},
      {"theta", lu(rng, 0.02, 1.0)}});
}

inline ParamMap draw_martcheva5d(Rng& rng) {
  return ParamMap(std::map<std::string, double>{
      {"D", lu(rng, 0.5, 50.0)}, {"Lambda", lu(rng, 0.5, 20.0)},
      {"beta", lu(rng, 0.1, 20.0)}, {"delta", lu(rng, 0.1, 5.0)},
      {"eta", lu(rng, 0.1, 50.0)}, {"gamma", lu(rng, 0.1, 20.0)},
      {"mu", lu(rng, 0.05, 2.0)}, {"psi", lu(rng, 0.1, 20.0)},
      {"sigma", un(rng, 0.02, 0.98)}, {"w", lu(rng, 0.05, 5.0)}});
}

// delta is placed above r_I (1 - p0/T_max) so the infected transition matrix
// is invertible with positive spectrum.
inline ParamMap draw_hepc3d(Rng& rng) {
  const double r_T = lu(rng, 0.5, 5.0), T_max = lu(rng, 20.0, 500.0);
  const double d = lu(rng, 0.05, 1.0);
  const double s = un(rng, 0.05, 0.95) * d * T_max;
  ParamMap p(std::map<std::string, double>{
      {"R_star", lu(rng, 0.3, 3.0)}, {"T_max", T_max}, {"b", lu(rng, 0.2, 3.0)},
      {"c", lu(rng, 0.1, 2.0)}, {"d", d}, {"delta", 1.0},
      {"r_I", lu(rng, 0.2, 4.0)}, {"r_T", r_T}, {"rho", lu(rng, 0.3, 3.0)},
      {"s", s}});
  const auto q = bifurcat::hepc_dfe_quantities(p);
  const double shed = p.at("r_I") * (1.0 - q.p0 / T_max);
  p.set("delta", lu(rng, 0.05, 5.0) + std::max(shed, 0.0));
  return p;
}

inline ParamMap draw_for(const std::string& id, Rng& rng) {
  if (id == "brauer2d") return draw_brauer2d(rng);
  if (id == "brauer3d") return draw_brauer3d(rng);
  if (id == "martcheva5d") return draw_martcheva5d(rng);
  return draw_hepc3d(rng);
}

inline double r0_closed(const std::string& id, const ParamMap& p) {
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
  const auto q = bifurcat::hepc_dfe_quantities(p);
  const double mt = p.at("rho") * p.at("R_star");
  const double den = (p.at("b") + p.at("c")) *
                     (p.at("delta") - p.at("r_I") * (1.0 - q.p0 / p.at("T_max")));
  return p.at("b") * mt / den;
}

// Threshold beta for the staged-protection models (R0 = 1 exactly).
inline double brauer_beta_star(const ParamMap& p, bool threed) {
  const double K = threed ? p.at("Lambda") / p.at("mu") : p.at("K");
  const double mu = p.at("mu"), th = p.at("theta"), ph = p.at("phi");
  return (mu + p.at("gamma")) * (mu + th + ph) / (K * (mu + th + p.at("sigma") * ph));
}

// The doubly degenerate hepatitis threshold point used across tests:
// rho = 1.25x its admissible floor, r_I solving a = 0, delta solving R0 = 1.
inline ParamMap hepc_degenerate_point() {
  return ParamMap(std::map<std::string, double>{
      {"R_star", 1.0}, {"T_max", 100.0}, {"b", 1.2}, {"c", 0.9}, {"d", 1.0},
      {"r_T", 3.0}, {"s", 50.0}, {"rho", 1.2712411908091648},
      {"r_I", 7.8759528849926541}, {"delta", 1.8260671508085102}});
}

// The cholera threshold point with a = 0: beta makes the quadratic's middle
// coefficient vanish, eta places R0 exactly at one.
inline ParamMap martcheva_degenerate_point() {
  return ParamMap(std::map<std::string, double>{
      {"D", 10.0}, {"Lambda", 1.0}, {"beta", 29.440289146953166}, {"delta", 1.5},
      {"eta", 88.544158380651623}, {"gamma", 50.0}, {"mu", 0.1}, {"psi", 11.0},
      {"sigma", 0.02}, {"w", 1.0}});
}

}  // namespace testutil
