#include "bifurcat/continuation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bifurcat/bifcoeffs.hpp"
#include "bifurcat/ngm.hpp"
#include "bifurcat/numdiff.hpp"

namespace bifurcat {

namespace {

using ordered_json = nlohmann::ordered_json;

VecFn rhs_at(const ModelSystem& model, const ParamMap& params,
             const std::string& alpha1, double value) {
  ParamMap q = params.with(alpha1, value);
  return [&model, q](const Vec& x) { return model.rhs(x, q); };
}

// Column d f / d alpha1 at (x, value).
Vec alpha1_column(const ModelSystem& model, const ParamMap& params,
                  const std::string& alpha1, const Vec& x, double value) {
  return dparam(
      [&](double t) { return model.rhs(x, params.with(alpha1, t)); }, value, 1.0);
}

// Unit tangent of the branch at (x, a1): kernel vector of the n x (n+1)
// extended Jacobian [J | f_alpha1]. rank_ratio (smallest/largest singular
// value of the extended matrix) is ~0 exactly when the matrix loses row rank,
// which happens at transcritical crossings but not at generic folds.
Vec branch_tangent(const ModelSystem& model, const ParamMap& params,
                   const std::string& alpha1, const Vec& x, double a1,
                   double* rank_ratio = nullptr) {
  const Eigen::Index n = x.size();
  Mat ext(n, n + 1);
  ext.leftCols(n) = jacobian(model, x, params.with(alpha1, a1));
  ext.col(n) = alpha1_column(model, params, alpha1, x, a1);
  Eigen::JacobiSVD<Mat> svd(ext, Eigen::ComputeFullV);
  if (rank_ratio) {
    const double smax = svd.singularValues()[0];
    *rank_ratio = smax > 0.0 ? svd.singularValues()[n - 1] / smax : 0.0;
  }
  return svd.matrixV().col(n);
}

double safe_r0(const ModelSystem& model, const ParamMap& params) {
  try {
    return r0(model, params).r0;
  } catch (const std::exception&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

struct EigInfo {
  CVec eigenvalues;
  double max_re = 0.0;
  std::string stability;
};

EigInfo eig_info(const ModelSystem& model, const ParamMap& params, const Vec& x) {
  EigInfo out;
  const Mat J = jacobian(model, x, params);
  Eigen::EigenSolver<Mat> es(J);
  out.eigenvalues = es.eigenvalues();
  out.max_re = out.eigenvalues.real().maxCoeff();
  const double tol = spectral_margin(J);
  bool any_marginal = false, all_negative = true;
  for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
    const double re = out.eigenvalues[i].real();
    if (std::abs(re) <= tol) any_marginal = true;
    if (!(re < -tol)) all_negative = false;
  }
  out.stability =
      any_marginal ? "nonhyperbolic" : (all_negative ? "stable" : "unstable");
  return out;
}

// Newton corrector for the pseudo-arclength system
//   f(x, a1) = 0,  tangent . (z - z_pred) = 0.
// Returns the iteration count, or -1 on failure.
int arclength_correct(const ModelSystem& model, const ParamMap& params,
                      const std::string& alpha1, const Vec& tangent,
                      const Vec& z_pred, Vec& z) {
  const Eigen::Index n = z.size() - 1;
  for (int it = 0; it < 12; ++it) {
    const Vec x = z.head(n);
    const double a1 = z[n];
    Vec fx;
    try {
      fx = model.rhs(x, params.with(alpha1, a1));
    } catch (const ModelError&) {
      return -1;
    }
    Vec F(n + 1);
    F.head(n) = fx;
    F[n] = tangent.dot(z - z_pred);
    if (!F.allFinite()) return -1;
    if (inf_norm(F) <= 1e-11 * (1.0 + inf_norm(z))) return it;
    Mat Jext(n + 1, n + 1);
    Jext.topLeftCorner(n, n) = jacobian(model, x, params.with(alpha1, a1));
    Jext.topRightCorner(n, 1) = alpha1_column(model, params, alpha1, x, a1);
    Jext.row(n) = tangent.transpose();
    const Vec dz = Jext.fullPivLu().solve(-F);
    if (!dz.allFinite()) return -1;
    z += dz;
  }
  return -1;
}

Mat vandermonde(const std::vector<double>& u, int degree) {
  Mat V(u.size(), degree + 1);
  for (std::size_t i = 0; i < u.size(); ++i) {
    double p = 1.0;
    for (int j = 0; j <= degree; ++j) {
      V(i, j) = p;
      p *= u[i];
    }
  }
  return V;
}

}  // namespace

Branch trace(const ModelSystem& model, const ParamMap& params,
             const std::string& alpha1, const SteadyState& start, int direction,
             const TraceOptions& opts) {
  model.require_admissible(params);
  Branch branch;
  branch.model_id = model.id;
  branch.alpha1 = alpha1;
  branch.state_names = model.state_names;
  branch.fixed_params = params;

  double a1 = params.at(alpha1);
  Vec x = start.x;
  if (inf_norm(model.rhs(x, params)) > 1e-9 * (1.0 + inf_norm(x))) {
    const auto polished = newton_solve(model, params, x);
    if (!polished)
      throw NumericsError(model.id + ": trace start is not a steady state");
    x = *polished;
  }

  const double scale = 1.0 + std::max(inf_norm(x), std::abs(a1));
  const double h_min = 1e-6 * scale, h_max = 1e-1 * scale;
  double h = opts.initial_step > 0.0
                 ? std::clamp(opts.initial_step, h_min, h_max)
                 : std::clamp(1e-3 * scale, h_min, h_max);

  const Eigen::Index n = model.n;
  Vec tangent = branch_tangent(model, params, alpha1, x, a1);
  if (std::abs(tangent[n]) > 1e-10) {
    if (tangent[n] * direction < 0.0) tangent = -tangent;
  } else if (direction < 0) {
    tangent = -tangent;
  }

  auto push_point = [&](double s, const Vec& xs, double a1s, double tan_a1,
                        bool fold) {
    BranchPoint pt;
    pt.s = s;
    pt.alpha1 = a1s;
    pt.x = xs;
    const ParamMap q = params.with(alpha1, a1s);
    pt.r0 = safe_r0(model, q);
    const EigInfo ei = eig_info(model, q, xs);
    pt.max_re_eig = ei.max_re;
    pt.stability = ei.stability;
    pt.tangent_alpha1 = tan_a1;
    pt.fold_flag = fold;
    branch.points.push_back(std::move(pt));
  };

  double s = 0.0;
  push_point(s, x, a1, tangent[n], false);
  branch.termination = "max-steps";

  for (int step = 0; step < opts.max_steps; ++step) {
    Vec z(n + 1);
    z.head(n) = x;
    z[n] = a1;
    Vec z_new;
    int iters = -1;
    while (true) {
      const Vec z_pred = z + h * tangent;
      z_new = z_pred;
      iters = arclength_correct(model, params, alpha1, tangent, z_pred, z_new);
      if (iters >= 0 && iters <= 8) break;
      h /= 2.0;
      if (h < h_min) break;
    }
    if (iters < 0 || iters > 8) {
      branch.termination = "corrector-failure";
      break;
    }
    if (iters <= 3) h = std::min(h * 1.3, h_max);

    const Vec x_new = z_new.head(n);
    const double a1_new = z_new[n];
    double rank_ratio = 0.0;
    Vec tangent_new =
        branch_tangent(model, params, alpha1, x_new, a1_new, &rank_ratio);
    if (tangent_new.dot(tangent) < 0.0) tangent_new = -tangent_new;

    // Fold marker: the alpha1-tangent flips sign while the extended Jacobian
    // keeps full row rank (a transcritical crossing loses rank instead,
    // because the parameter column vanishes at the disease-free state).
    const bool sign_flip = tangent_new[n] * tangent[n] < 0.0;
    const bool fold = sign_flip && rank_ratio > 1e-8;

    s += (z_new - z).norm();
    push_point(s, x_new, a1_new, tangent_new[n], fold);

    x = x_new;
    a1 = a1_new;
    tangent = tangent_new;

    if (a1 < opts.alpha1_min || a1 > opts.alpha1_max) {
      branch.termination = "range-exit";
      break;
    }
    if (opts.stop_at_negative) {
      bool negative = false;
      for (Eigen::Index i = 0; i < n; ++i)
        if (x[i] < -1e-9 * scale) negative = true;
      if (negative) {
        branch.termination = "positivity-exit";
        break;
      }
    }
    if (step == opts.max_steps - 1) branch.termination = "max-steps";
  }
  return branch;
}

std::optional<FoldPoint> refine_fold(const ModelSystem& model, const ParamMap& params,
                                     const std::string& alpha1, const Vec& x_guess,
                                     double alpha1_guess) {
  const Eigen::Index n = x_guess.size();
  // Unknowns z = (x, w, a1); equations f = 0, J w = 0, ||w||^2 = 1.
  Vec x = x_guess;
  double a1 = alpha1_guess;
  const Mat J0 = jacobian(model, x, params.with(alpha1, a1));
  Eigen::JacobiSVD<Mat> svd0(J0, Eigen::ComputeFullV);
  Vec w = svd0.matrixV().col(n - 1);

  Vec z(2 * n + 1);
  z.head(n) = x;
  z.segment(n, n) = w;
  z[2 * n] = a1;

  auto residual = [&](const Vec& zz) -> std::optional<Vec> {
    const Vec xs = zz.head(n);
    const Vec ws = zz.segment(n, n);
    const double a1s = zz[2 * n];
    try {
      const ParamMap q = params.with(alpha1, a1s);
      Vec F(2 * n + 1);
      F.head(n) = model.rhs(xs, q);
      F.segment(n, n) = jacobian(model, xs, q) * ws;
      F[2 * n] = ws.squaredNorm() - 1.0;
      if (!F.allFinite()) return std::nullopt;
      return F;
    } catch (const ModelError&) {
      return std::nullopt;
    }
  };

  for (int it = 0; it < 40; ++it) {
    const auto F = residual(z);
    if (!F) return std::nullopt;
    if (inf_norm(*F) <= 1e-11 * (1.0 + inf_norm(z))) break;
    // Jacobian of the extended system by finite differences in z.
    const Eigen::Index m = 2 * n + 1;
    Mat JF(m, m);
    const double h0 = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 3.0);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double hj = h0 * (1.0 + std::abs(z[j]));
      Vec zp = z, zm = z;
      zp[j] += hj;
      zm[j] -= hj;
      const auto Fp = residual(zp), Fm = residual(zm);
      if (!Fp || !Fm) return std::nullopt;
      JF.col(j) = (*Fp - *Fm) / (2.0 * hj);
    }
    const Vec dz = JF.fullPivLu().solve(-*F);
    if (!dz.allFinite()) return std::nullopt;
    z += dz;
  }
  const auto F = residual(z);
  if (!F || inf_norm(*F) > 1e-9 * (1.0 + inf_norm(z))) return std::nullopt;

  FoldPoint fp;
  fp.x = z.head(n);
  fp.tangent = z.segment(n, n);
  fp.alpha1 = z[2 * n];
  const EigInfo ei = eig_info(model, params.with(alpha1, fp.alpha1), fp.x);
  double best = std::numeric_limits<double>::infinity();
  Eigen::Index crit = 0;
  for (Eigen::Index i = 0; i < ei.eigenvalues.size(); ++i) {
    if (std::abs(ei.eigenvalues[i].real()) < best) {
      best = std::abs(ei.eigenvalues[i].real());
      crit = i;
    }
  }
  fp.max_re_other = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ei.eigenvalues.size(); ++i)
    if (i != crit)
      fp.max_re_other = std::max(fp.max_re_other, ei.eigenvalues[i].real());
  return fp;
}

std::vector<FoldPoint> fold_points(const ModelSystem& model, const Branch& branch) {
  std::vector<FoldPoint> out;
  for (std::size_t i = 1; i < branch.points.size(); ++i) {
    if (!branch.points[i].fold_flag) continue;
    const auto& p0 = branch.points[i - 1];
    const auto& p1 = branch.points[i];
    const Vec x_mid = 0.5 * (p0.x + p1.x);
    const double a1_mid = 0.5 * (p0.alpha1 + p1.alpha1);
    auto fp = refine_fold(model, branch.fixed_params, branch.alpha1, x_mid, a1_mid);
    if (!fp) continue;
    bool dup = false;
    for (const auto& f : out)
      if (std::abs(f.alpha1 - fp->alpha1) <= 1e-8 * (1.0 + std::abs(f.alpha1)))
        dup = true;
    if (!dup) out.push_back(std::move(*fp));
  }
  return out;
}

namespace {

// One point of the bordered branch march: solve f(x, a1) = 0 together with
// the chart pinning v . (x - x0) = u.
std::optional<std::pair<Vec, double>> bordered_solve(
    const ModelSystem& model, const ParamMap& params, const std::string& alpha1,
    const Vec& x0, const Vec& v, double u_target, const Vec& x_init, double a1_init) {
  const Eigen::Index n = x0.size();
  Vec z(n + 1);
  z.head(n) = x_init;
  z[n] = a1_init;
  for (int it = 0; it < 60; ++it) {
    const Vec x = z.head(n);
    const double a1 = z[n];
    Vec fx;
    try {
      fx = model.rhs(x, params.with(alpha1, a1));
    } catch (const ModelError&) {
      return std::nullopt;
    }
    Vec F(n + 1);
    F.head(n) = fx;
    F[n] = v.dot(x - x0) - u_target;
    if (!F.allFinite()) return std::nullopt;
    if (inf_norm(F) <= 1e-12 * (1.0 + inf_norm(z)))
      return std::make_pair(Vec(z.head(n)), z[n]);
    Mat J(n + 1, n + 1);
    J.topLeftCorner(n, n) = jacobian(model, x, params.with(alpha1, a1));
    J.topRightCorner(n, 1) = alpha1_column(model, params, alpha1, x, a1);
    J.row(n).head(n) = v.transpose();
    J(n, n) = 0.0;
    const Vec dz = J.fullPivLu().solve(-F);
    if (!dz.allFinite()) return std::nullopt;
    z += dz;
  }
  return std::nullopt;
}

struct MarchSample {
  double u, a1;
};

std::vector<MarchSample> march_chart(const ModelSystem& model, const ParamMap& params,
                                     const std::string& alpha1, const Vec& x0,
                                     const Vec& v, const Vec& w, double a1c,
                                     int u_dir, double u_max, int nstep = 400) {
  std::vector<MarchSample> samples;
  Vec x = x0;
  double a1 = a1c;
  const double lo = std::log(u_max / 60.0), hi = std::log(u_max);
  for (int k = 0; k < nstep; ++k) {
    const double u =
        u_dir * std::exp(lo + (hi - lo) * k / static_cast<double>(nstep - 1));
    const Vec seed = x + (u - v.dot(x - x0)) * w;
    const auto sol = bordered_solve(model, params, alpha1, x0, v, u, seed, a1);
    if (!sol) break;
    x = sol->first;
    a1 = sol->second;
    samples.push_back({u, a1});
  }
  return samples;
}

struct FoldFit {
  bool found = false;
  double u_fold = 0.0, a1_fold = 0.0;
  bool has_threshold = false;
  double u_threshold = 0.0;
};

FoldFit fit_fold_and_threshold(const std::vector<MarchSample>& samples, double a1c) {
  FoldFit out;
  if (samples.size() < 8) return out;
  std::size_t k = 0;
  for (std::size_t j = 2; j < samples.size(); ++j) {
    const double d0 = samples[j - 1].a1 - samples[j - 2].a1;
    const double d1 = samples[j].a1 - samples[j - 1].a1;
    if (d0 != 0.0 && d1 != 0.0 && ((d0 > 0) != (d1 > 0))) {
      k = j - 1;
      break;
    }
  }
  if (k == 0) return out;
  const std::size_t lo = k >= 4 ? k - 4 : 0;
  const std::size_t hi = std::min(samples.size(), k + 5);
  std::vector<double> uu, aa;
  for (std::size_t j = lo; j < hi; ++j) {
    uu.push_back(samples[j].u);
    aa.push_back(samples[j].a1);
  }
  const Mat V = vandermonde(uu, 2);
  Vec rhs(aa.size());
  for (std::size_t j = 0; j < aa.size(); ++j) rhs[j] = aa[j];
  const Vec cf = V.colPivHouseholderQr().solve(rhs);  // cf[0] + cf[1] u + cf[2] u^2
  if (cf[2] == 0.0) return out;
  out.found = true;
  out.u_fold = -cf[1] / (2.0 * cf[2]);
  out.a1_fold = cf[0] + cf[1] * out.u_fold + cf[2] * out.u_fold * out.u_fold;
  for (std::size_t j = k; j + 1 < samples.size(); ++j) {
    const double g0 = samples[j].a1 - a1c;
    const double g1 = samples[j + 1].a1 - a1c;
    if (g0 * g1 <= 0.0 && g0 != g1) {
      const double t = g0 / (g0 - g1);
      out.u_threshold = samples[j].u + t * (samples[j + 1].u - samples[j].u);
      out.has_threshold = true;
      break;
    }
  }
  return out;
}

}  // namespace

FoldLocusReport fold_locus(const ModelSystem& model, const ParamMap& params,
                           const std::string& alpha1, const std::string& alpha2,
                           double range) {
  FoldLocusReport report;
  const CenterCoefficients C = coefficients(model, params, alpha1, alpha2);
  if (!(C.b > 0.0))
    throw NumericsError(model.id + ": hypothesis violated: b must be positive");
  report.pred_two_e = 2.0 * C.e;
  report.pred_two_e_corrected = 2.0 * C.e_corrected;
  report.pred_alpha1_slope = -C.fualpha2 / C.b;

  const double e_est =
      std::max(std::abs(C.e_corrected), std::abs(C.e)) > 0.0
          ? std::max(std::abs(C.e_corrected), std::abs(C.e))
          : 1.0;
  const double a2_base = params.at(alpha2);

  auto locus_point = [&](double offset) {
    FoldLocusPoint pt;
    pt.alpha2_offset = offset;
    ParamMap q = params.with(alpha2, a2_base + offset);
    double a1c;
    try {
      a1c = alpha1_at_threshold(model, q, alpha1);
    } catch (const std::exception&) {
      return pt;
    }
    q.set(alpha1, a1c);
    const Vec x0 = model.dfe(q);
    const double u_max = 4.0 * e_est * std::abs(offset);
    for (int u_dir : {+1, -1}) {
      const auto samples =
          march_chart(model, q, alpha1, x0, C.null.v, C.null.w, a1c, u_dir, u_max);
      const FoldFit fit = fit_fold_and_threshold(samples, a1c);
      if (fit.found) {
        pt.found = true;
        pt.alpha1_fold = fit.a1_fold;
        pt.u_fold = fit.u_fold;
        pt.u_threshold_root = fit.has_threshold ? fit.u_threshold : 0.0;
        break;
      }
    }
    return pt;
  };

  const double offsets[] = {-range, -0.5 * range, 0.5 * range, range};
  for (double off : offsets) report.points.push_back(locus_point(off));

  const FoldLocusPoint& left = report.points.front();
  const FoldLocusPoint& right = report.points.back();
  if (left.found && right.found) {
    report.slope_u_fold = (right.u_fold - left.u_fold) / (2.0 * range);
    if (left.u_threshold_root != 0.0 && right.u_threshold_root != 0.0)
      report.slope_u_threshold =
          (right.u_threshold_root - left.u_threshold_root) / (2.0 * range);
    const auto a1c_of = [&](double off) {
      return alpha1_at_threshold(model, params.with(alpha2, a2_base + off), alpha1);
    };
    report.slope_alpha1_threshold = (a1c_of(range) - a1c_of(-range)) / (2.0 * range);
  } else {
    report.degenerate = true;
    std::ostringstream note;
    note << "no fold detected within |u| <= " << 4.0 * e_est * range
         << " on either march direction; the unfolding in " << alpha2
         << " appears degenerate at this point";
    report.note = note.str();
    try {
      report.slope_alpha1_threshold =
          (alpha1_at_threshold(model, params.with(alpha2, a2_base + range), alpha1) -
           alpha1_at_threshold(model, params.with(alpha2, a2_base - range), alpha1)) /
          (2.0 * range);
    } catch (const std::exception&) {
    }
  }
  return report;
}

void export_csv(const Branch& branch, std::ostream& os) {
  os << "# schema=branch/1 model=" << branch.model_id << " alpha1=" << branch.alpha1
     << " termination=" << branch.termination << "\n";
  os << "s,alpha1";
  for (const auto& name : branch.state_names) os << "," << name;
  os << ",r0,max_re_eig,fold_flag\n";
  char buf[512];
  for (const auto& p : branch.points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", p.s, p.alpha1);
    os << buf;
    for (Eigen::Index i = 0; i < p.x.size(); ++i) {
      std::snprintf(buf, sizeof(buf), ",%.17g", p.x[i]);
      os << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g,%d", p.r0, p.max_re_eig,
                  p.fold_flag ? 1 : 0);
    os << buf << "\n";
  }
}

void export_json(const Branch& branch, std::ostream& os) {
  ordered_json j;
  j["schema"] = "branch/1";
  j["model"] = branch.model_id;
  j["alpha1"] = branch.alpha1;
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : branch.fixed_params.values()) params[k] = v;
  j["params"] = params;
  j["termination"] = branch.termination;
  ordered_json pts = ordered_json::array();
  for (const auto& p : branch.points) {
    ordered_json pj;
    pj["s"] = p.s;
    pj["alpha1"] = p.alpha1;
    pj["x"] = std::vector<double>(p.x.data(), p.x.data() + p.x.size());
    pj["r0"] = p.r0;
    pj["max_re_eig"] = p.max_re_eig;
    pj["tangent_alpha1"] = p.tangent_alpha1;
    pj["fold_flag"] = p.fold_flag;
    pj["stability"] = p.stability;
    pts.push_back(std::move(pj));
  }
  j["points"] = std::move(pts);
  os << j.dump(2) << "\n";
}

}  // namespace bifurcat
