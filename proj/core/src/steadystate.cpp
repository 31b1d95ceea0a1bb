#include "bifurcat/steadystate.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "bifurcat/ngm.hpp"
#include "bifurcat/numdiff.hpp"

namespace bifurcat {

std::string to_string(Positivity p) {
  switch (p) {
    case Positivity::positive: return "positive";
    case Positivity::boundary: return "boundary";
    case Positivity::infeasible: return "infeasible";
  }
  return "boundary";
}

namespace {

std::vector<double> conv(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

void add_into(std::vector<double>& target, const std::vector<double>& inc) {
  if (target.size() < inc.size()) target.resize(inc.size(), 0.0);
  for (std::size_t i = 0; i < inc.size(); ++i) target[i] += inc[i];
}

// Evaluates rhs, mapping domain errors (e.g. the hepc3d incidence guard) to
// "no value" so a multi-start search can discard a bad point quietly.
std::optional<Vec> try_eval(const ModelSystem& model, const ParamMap& params,
                            const Vec& x) {
  try {
    Vec f = model.rhs(x, params);
    if (!f.allFinite()) return std::nullopt;
    return f;
  } catch (const ModelError&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<double> poly_real_roots(const std::vector<double>& ascending) {
  double max_abs = 0.0;
  for (double c : ascending) max_abs = std::max(max_abs, std::abs(c));
  if (max_abs == 0.0) return {};
  std::size_t deg = ascending.size();
  while (deg > 0 && std::abs(ascending[deg - 1]) <= 1e-12 * max_abs) --deg;
  if (deg <= 1) return {};  // constant (or identically ~zero)
  const std::size_t m = deg - 1;  // polynomial degree
  if (m == 1) return {-ascending[0] / ascending[1]};

  Mat companion = Mat::Zero(m, m);
  for (std::size_t i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
  for (std::size_t k = 0; k < m; ++k)
    companion(k, m - 1) = -ascending[k] / ascending[m];
  Eigen::EigenSolver<Mat> es(companion);
  std::vector<double> roots;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const auto z = es.eigenvalues()[i];
    if (std::abs(z.imag()) <= 1e-9 * std::max(1.0, std::abs(z.real())))
      roots.push_back(z.real());
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<double> PolyReduction::real_roots() const { return poly_real_roots(coeffs); }

std::vector<Vec> PolyReduction::states() const {
  std::vector<Vec> out;
  for (double r : real_roots())
    if (auto x = back_map(r)) out.push_back(*x);
  return out;
}

std::optional<Vec> newton_solve(const ModelSystem& model, const ParamMap& params,
                                const Vec& seed, int max_iter) {
  Vec x = seed;
  auto f0 = try_eval(model, params, x);
  if (!f0) return std::nullopt;
  for (int it = 0; it < max_iter; ++it) {
    Mat J;
    try {
      J = jacobian(model, x, params);
    } catch (const ModelError&) {
      return std::nullopt;
    }
    const Vec fx = *f0;
    // Min-norm least-squares step: identical to the exact Newton step for a
    // regular Jacobian, but stays bounded when J is (near-)singular, e.g. on
    // a continuum of steady states where J has an exact kernel.
    auto cod = J.completeOrthogonalDecomposition();
    cod.setThreshold(1e-10);
    const Vec dx = cod.solve(-fx);
    if (!dx.allFinite()) return std::nullopt;
    double lambda = 1.0;
    const double fn = inf_norm(fx);
    Vec x_next;
    std::optional<Vec> f_next;
    for (int ls = 0; ls < 30; ++ls) {
      x_next = x + lambda * dx;
      f_next = try_eval(model, params, x_next);
      if (f_next && (inf_norm(*f_next) < fn || lambda < 1e-6)) break;
      lambda /= 2.0;
      f_next.reset();
    }
    if (!f_next) return std::nullopt;
    x = x_next;
    f0 = f_next;
    if (inf_norm(*f0) <= 1e-13 * (1.0 + inf_norm(x))) return x;
  }
  if (f0 && inf_norm(*f0) <= 1e-10 * (1.0 + inf_norm(x))) return x;
  return std::nullopt;
}

SteadyState classify_state(const ModelSystem& model, const ParamMap& params,
                           const Vec& x) {
  SteadyState st;
  st.x = x;
  st.residual = inf_norm(model.rhs(x, params));
  const Mat J = jacobian(model, x, params);
  Eigen::EigenSolver<Mat> es(J);
  st.eigenvalues = es.eigenvalues();
  const double tol = spectral_margin(J);
  bool any_marginal = false, all_negative = true;
  for (Eigen::Index i = 0; i < st.eigenvalues.size(); ++i) {
    const double re = st.eigenvalues[i].real();
    if (std::abs(re) <= tol) any_marginal = true;
    if (!(re < -tol)) all_negative = false;
  }
  st.stability = any_marginal ? "nonhyperbolic" : (all_negative ? "stable" : "unstable");

  const double pos_tol = 1e-9 * (1.0 + inf_norm(x));
  bool all_positive = true, any_negative = false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > pos_tol)) all_positive = false;
    if (x[i] < -pos_tol) any_negative = true;
  }
  st.positivity = any_negative ? Positivity::infeasible
                               : (all_positive ? Positivity::positive : Positivity::boundary);

  st.infected_mass = 0.0;
  for (int idx : model.infected_idx) st.infected_mass += x[idx];
  return st;
}

PolyReduction brauer_quadratic(const ParamMap& params) {
  const double beta = params.at("beta"), K = params.at("K"), mu = params.at("mu");
  const double gamma = params.at("gamma"), sigma = params.at("sigma");
  const double phi = params.at("phi"), theta = params.at("theta");
  PolyReduction red;
  const double a2 = sigma * beta * beta;
  const double a1 =
      sigma * beta * (mu + gamma) + beta * (mu + theta + sigma * phi) - sigma * beta * beta * K;
  const double a0 = (mu + theta + phi) * (mu + gamma) - beta * (mu + theta + sigma * phi) * K;
  red.coeffs = {a0, a1, a2};
  red.back_map = [beta, K, mu, sigma, phi, theta](double I) -> std::optional<Vec> {
    const double den = sigma * beta * I + mu + theta + phi;
    if (std::abs(den) < 1e-300) return std::nullopt;
    Vec x(2);
    x[0] = I;
    x[1] = phi * (K - I) / den;
    return x;
  };
  return red;
}

PolyReduction hepc_X_reduction(const ParamMap& params) {
  const double b = params.at("b"), c = params.at("c"), r_I = params.at("r_I");
  const double r_T = params.at("r_T"), d = params.at("d"), s = params.at("s");
  const double delta = params.at("delta"), T_max = params.at("T_max");
  const double mu = params.at("rho") * params.at("R_star");

  const std::vector<double> lin = {c, b};  // c + bX
  // q1 = (r_I - delta)(c + bX) + b mu X
  std::vector<double> q1 = {(r_I - delta) * c, (r_I - delta) * b + b * mu};
  // b2 = r_T X (delta(c+bX) - b mu X) - r_I d X (c+bX) - r_I b mu X(1-X)
  std::vector<double> b2 = conv({0.0, r_T}, {delta * c, delta * b - b * mu});
  add_into(b2, {0.0, -r_I * d * c, -r_I * d * b});
  add_into(b2, {0.0, -r_I * b * mu, r_I * b * mu});
  // p3 = s r_I^2 (c+bX)^2 + T_max q1 b2
  std::vector<double> p3 = conv(lin, lin);
  for (double& v : p3) v *= s * r_I * r_I;
  std::vector<double> prod = conv(q1, b2);
  for (double& v : prod) v *= T_max;
  add_into(p3, prod);

  PolyReduction red;
  red.coeffs = p3;
  red.back_map = [b, c, r_I, delta, T_max, mu](double X) -> std::optional<Vec> {
    const double den = c + b * X;
    if (std::abs(den) < 1e-300 || r_I == 0.0) return std::nullopt;
    const double P = T_max * ((r_I - delta) * den + b * mu * X) / (r_I * den);
    if (!(P > 0.0)) return std::nullopt;  // T + I must stay in the model domain
    Vec x(3);
    x[0] = X * P;
    x[1] = (1.0 - X) * P;
    x[2] = mu * x[1] / den;
    return x;
  };
  return red;
}

PolyReduction martcheva_quadratic(const ParamMap& params) {
  const MartQuadSplit split = martcheva_quadratic_eta_split(params);
  const double eta = params.at("eta");
  PolyReduction red;
  red.coeffs = {split.A[0] * eta + split.B[0], split.A[1] * eta + split.B[1],
                split.A[2] * eta + split.B[2]};
  const double beta = params.at("beta"), D = params.at("D");
  const double delta = params.at("delta"), gamma = params.at("gamma");
  const double mu = params.at("mu"), w = params.at("w"), psi = params.at("psi");
  const double sigma = params.at("sigma"), Lambda = params.at("Lambda");
  red.back_map = [beta, D, delta, gamma, mu, w, psi, sigma, Lambda,
                  eta](double u) -> std::optional<Vec> {
    const double bden = beta - u;
    if (std::abs(bden) < 1e-12 * (1.0 + beta)) return std::nullopt;
    const double B = D * u / bden;
    if (std::abs(B + D) < 1e-300) return std::nullopt;  // force-of-infection pole
    const double I = delta * B / eta;
    const double R = gamma * I / (mu + w);
    const double S = (Lambda + w * R) / (u + mu + psi);
    const double V = psi * S / (sigma * u + mu);
    Vec x(5);
    x[0] = S;
    x[1] = V;
    x[2] = I;
    x[3] = R;
    x[4] = B;
    return x;
  };
  return red;
}

MartQuadSplit martcheva_quadratic_eta_split(const ParamMap& params) {
  const double Lambda = params.at("Lambda"), beta = params.at("beta"), D = params.at("D");
  const double mu = params.at("mu"), psi = params.at("psi"), w = params.at("w");
  const double sigma = params.at("sigma"), gamma = params.at("gamma");
  const double delta = params.at("delta");
  // q(u) = eta * A(u) + B(u) with
  //   A = (Lambda beta (mu+w) - Lambda (mu+w) u) (sigma u + mu + sigma psi)
  //   B = w gamma delta D u (sigma u + mu + sigma psi)
  //       - (mu+gamma) delta D (mu+w) (u + mu + psi)(sigma u + mu)
  const std::vector<double> a2 = {mu + sigma * psi, sigma};
  const std::vector<double> eta_part =
      conv({Lambda * beta * (mu + w), -Lambda * (mu + w)}, a2);
  std::vector<double> rest = conv({0.0, w * gamma * delta * D}, a2);
  std::vector<double> loss = conv({mu + psi, 1.0}, {mu, sigma});
  for (double& v : loss) v *= -(mu + gamma) * delta * D * (mu + w);
  add_into(rest, loss);

  MartQuadSplit out{};
  for (int k = 0; k < 3; ++k) {
    out.A[k] = eta_part[k];
    out.B[k] = rest[k];
  }
  return out;
}

std::optional<std::pair<double, double>> martcheva_eta_fold(const ParamMap& params,
                                                            double eta_ref) {
  const MartQuadSplit s = martcheva_quadratic_eta_split(params);
  // discriminant(eta) = (A1 eta + B1)^2 - 4 (A2 eta + B2)(A0 eta + B0)
  const double c2 = s.A[1] * s.A[1] - 4.0 * s.A[2] * s.A[0];
  const double c1 = 2.0 * s.A[1] * s.B[1] - 4.0 * (s.A[2] * s.B[0] + s.B[2] * s.A[0]);
  const double c0 = s.B[1] * s.B[1] - 4.0 * s.B[2] * s.B[0];
  const std::vector<double> roots = poly_real_roots({c0, c1, c2});
  if (roots.empty()) return std::nullopt;
  double eta_fold = roots[0];
  for (double r : roots)
    if (std::abs(r - eta_ref) < std::abs(eta_fold - eta_ref)) eta_fold = r;
  const double den = 2.0 * (s.A[2] * eta_fold + s.B[2]);
  if (std::abs(den) < 1e-300) return std::nullopt;
  const double u_fold = -(s.A[1] * eta_fold + s.B[1]) / den;
  return std::make_pair(eta_fold, u_fold);
}

namespace {

std::optional<PolyReduction> reduction_for(const ModelSystem& model,
                                           const ParamMap& params) {
  if (model.id == "brauer2d") return brauer_quadratic(params);
  if (model.id == "brauer3d") {
    // The three-dimensional system lives on the invariant simplex
    // S + I + V = Lambda / mu, so its interior states are the lift of the
    // two-dimensional reduction with K = Lambda / mu.
    ParamMap q = params;
    const double K = params.at("Lambda") / params.at("mu");
    q.set("K", K);
    PolyReduction red2 = brauer_quadratic(q);
    PolyReduction red;
    red.coeffs = red2.coeffs;
    red.back_map = [inner = red2.back_map, K](double I) -> std::optional<Vec> {
      const auto flat = inner(I);
      if (!flat) return std::nullopt;
      Vec x(3);
      x[0] = K - (*flat)[0] - (*flat)[1];
      x[1] = (*flat)[0];
      x[2] = (*flat)[1];
      return x;
    };
    return red;
  }
  if (model.id == "martcheva5d") return martcheva_quadratic(params);
  if (model.id == "hepc3d" || model.id == "hepc3d_truncated") {
    ParamMap q = params;
    if (model.id == "hepc3d_truncated") {
      q.set("s", 0.0);
      q.set("d", 0.0);
    }
    return hepc_X_reduction(q);
  }
  return std::nullopt;
}

}  // namespace

std::vector<SteadyState> enumerate_states(const ModelSystem& model,
                                          const ParamMap& params) {
  model.require_admissible(params);
  const Vec x0 = model.dfe(params);
  std::vector<Vec> seeds = {x0};

  if (auto red = reduction_for(model, params))
    for (const Vec& x : red->states()) seeds.push_back(x);

  if (model.id == "hepc3d_truncated") {
    const double r_I = params.at("r_I"), delta = params.at("delta");
    if (r_I > delta) {
      const double T_max = params.at("T_max"), c = params.at("c");
      const double mu = params.at("rho") * params.at("R_star");
      Vec xb(3);
      xb[0] = 0.0;
      xb[1] = T_max * (r_I - delta) / r_I;
      xb[2] = mu * xb[1] / c;
      seeds.push_back(xb);
    }
  }

  // 5^n grid over the positivity box [0, 2 * DFE-scale]^n.
  const double box = 2.0 * std::max(1e-6, inf_norm(x0));
  const int levels = 5;
  const int n = model.n;
  std::vector<int> digit(n, 0);
  while (true) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = box * digit[i] / (levels - 1);
    seeds.push_back(x);
    int carry = 0;
    for (carry = 0; carry < n; ++carry) {
      if (++digit[carry] < levels) break;
      digit[carry] = 0;
    }
    if (carry == n) break;
  }

  std::vector<SteadyState> found;
  for (const Vec& seed : seeds) {
    const auto x = newton_solve(model, params, seed);
    if (!x) continue;
    bool duplicate = false;
    for (const auto& st : found) {
      const double sep_tol = 1e-6 * (1.0 + std::max(inf_norm(st.x), inf_norm(*x)));
      if (inf_norm(Vec(st.x - *x)) <= sep_tol) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    SteadyState st = classify_state(model, params, *x);
    if (st.residual > 1e-9 * (1.0 + inf_norm(st.x))) continue;
    found.push_back(std::move(st));
  }

  std::sort(found.begin(), found.end(), [](const SteadyState& a, const SteadyState& b) {
    if (a.infected_mass != b.infected_mass) return a.infected_mass < b.infected_mass;
    for (Eigen::Index i = 0; i < a.x.size(); ++i)
      if (a.x[i] != b.x[i]) return a.x[i] < b.x[i];
    return false;
  });
  return found;
}

ParityAudit parity_audit(const ModelSystem& model, const ParamMap& params) {
  ParityAudit audit;
  const auto red = reduction_for(model, params);
  if (!red) {
    audit.abstained = true;
    audit.reason = "no polynomial reduction for model " + model.id;
    return audit;
  }
  audit.r0 = r0(model, params).r0;
  if (model.id == "hepc3d" || model.id == "hepc3d_truncated")
    audit.hepc_feasibility =
        params.at("rho") * params.at("R_star") + params.at("r_I") - params.at("delta");

  if (std::abs(audit.r0 - 1.0) < 1e-6) {
    audit.abstained = true;
    audit.reason = "R0 within 1e-6 of threshold";
    return audit;
  }

  const std::vector<double> roots = red->real_roots();
  double root_scale = 1.0;
  for (double r : roots) root_scale = std::max(root_scale, std::abs(r));
  for (std::size_t i = 1; i < roots.size(); ++i) {
    if (roots[i] - roots[i - 1] <= 1e-4 * root_scale) {
      audit.abstained = true;
      audit.reason = "near-degenerate root pair (possible fold)";
      return audit;
    }
  }

  int count = 0;
  for (double r : roots) {
    const auto x = red->back_map(r);
    if (!x) continue;
    const double pos_tol = 1e-9 * (1.0 + inf_norm(*x));
    bool positive = true;
    for (Eigen::Index i = 0; i < x->size(); ++i)
      if (!((*x)[i] > pos_tol)) positive = false;
    if (!positive) continue;
    // Near-boundary roots make the positive/boundary call unreliable.
    double min_coord = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < x->size(); ++i)
      min_coord = std::min(min_coord, (*x)[i]);
    if (min_coord <= 1e-6 * (1.0 + inf_norm(*x))) {
      audit.abstained = true;
      audit.reason = "positive steady state too close to the boundary";
      return audit;
    }
    ++count;
  }
  audit.count = count;
  const bool even = count % 2 == 0;
  audit.parity_ok = even == (audit.r0 < 1.0);
  return audit;
}

}  // namespace bifurcat
