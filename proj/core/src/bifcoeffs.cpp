#include "bifurcat/bifcoeffs.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "bifurcat/numdiff.hpp"

namespace bifurcat {

double CenterCoefficients::tol_e() const {
  const double ratio = std::abs(b * d) / (2.0 * std::abs(b * c) + 1e-300);
  return 1e-6 * (1.0 + ratio);
}

namespace {

constexpr double kKernelShiftTau = 0.37;

// Least-squares solve that treats singular values below 1e-6 * sigma_max as
// zero. At a bifurcation point the Jacobian kernel direction is excluded, so
// the solution is the minimum-norm one orthogonal to (numerically) ker A.
Vec pseudo_solve(const Mat& A, const Vec& y) {
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-6);
  return svd.solve(y);
}

struct CoeffDetail {
  CenterCoefficients C;
  double cpart3 = 0.0;  // (1/3) v . d3f(w,w,w)
  double cpart2 = 0.0;  // v . d2f(z, w)
  Vec x0, y, z;
};

CoeffDetail compute_detail(const ModelSystem& model, const ParamMap& params,
                           const std::string& alpha1, const std::string& alpha2,
                           double kernel_shift) {
  CoeffDetail out;
  CenterCoefficients& C = out.C;
  C.alpha1 = alpha1;
  C.alpha2 = alpha2;
  C.null = null_pair(model, params);
  const Vec& v = C.null.v;
  const Vec& w = C.null.w;
  const Mat& A = C.null.A;
  out.x0 = model.dfe(params);
  const Vec& x0 = out.x0;

  // a and its decision scale.
  out.y = d2f(model, x0, params, w, w);
  C.a = 0.5 * v.dot(out.y);
  // The scale is the total magnitude sum over contraction entries,
  // |v_i w_j w_k H_ijk|, taken before any sign cancellation. Splitting at
  // the entry level (per-pair directional stencils) keeps the scale O(1)
  // even at points where the contracted component values themselves cancel
  // to zero, which happens whenever v is supported on a single nonlinear
  // row.
  double mass = 0.0;
  for (int j = 0; j < model.n; ++j) {
    for (int k = j; k < model.n; ++k) {
      if (w[j] == 0.0 || w[k] == 0.0) continue;
      Vec ej = Vec::Zero(model.n), ek = Vec::Zero(model.n);
      ej[j] = 1.0;
      ek[k] = 1.0;
      const Vec Hjk = d2f(model, x0, params, ej, ek);
      const double wgt = (j == k ? 1.0 : 2.0) * std::abs(w[j] * w[k]);
      mass += wgt * v.cwiseAbs().dot(Hjk.cwiseAbs());
    }
  }
  C.a_scale = 0.5 * mass;

  // c: third-order contraction minus the second-order pseudo-solve term.
  out.z = pseudo_solve(A, out.y);
  if (kernel_shift != 0.0) out.z += kernel_shift * w;
  out.cpart3 = v.dot(d3f(model, x0, params, w, w, w)) / 3.0;
  out.cpart2 = v.dot(d2f(model, x0, params, out.z, w));
  C.c = out.cpart3 - out.cpart2;
  const double cpart2_shifted =
      v.dot(d2f(model, x0, params, Vec(out.z + kKernelShiftTau * w), w));
  C.c_kernel_sensitivity = std::abs((out.cpart3 - cpart2_shifted) - C.c);

  if (!alpha1.empty()) {
    // b is only meaningful for parameters that move R0 without moving the DFE.
    const double base = params.at(alpha1);
    const Vec ddfe = dparam(
        [&](double t) { return model.dfe(params.with(alpha1, t)); }, base, 1.0);
    if (inf_norm(ddfe) > 1e-8)
      throw NumericsError(model.id + ": invalid bifurcation parameter " + alpha1 +
                          " (disease-free equilibrium depends on it)");
    const Vec A1w = d2f_param(model, x0, params, w, alpha1);
    C.b = v.dot(A1w);
    C.fuualpha1 = v.dot(d3f_param(model, x0, params, w, w, alpha1));

    if (!alpha2.empty()) {
      const Vec A2w = d2f_param(model, x0, params, w, alpha2);
      C.fualpha2 = v.dot(A2w);
      C.d = v.dot(d3f_param(model, x0, params, w, w, alpha2));
      C.e = (-C.b * C.d + C.fuualpha1 * C.fualpha2) / (2.0 * C.b * C.c);

      // Second-order manifold corrections: the reduced equation's true
      // u^2-alpha2 and u^2-alpha1 coefficients pick up contributions from the
      // parameter dependence of the manifold itself. These are what the
      // measured fold-locus slopes follow.
      const Vec h_uu = pseudo_solve(A, Vec(-out.y));
      const Vec h_ua2 = pseudo_solve(A, Vec(C.fualpha2 * w - A2w));
      C.d_corrected = C.d + v.dot(d2f_param(model, x0, params, h_uu, alpha2)) +
                      2.0 * v.dot(d2f(model, x0, params, w, h_ua2));
      const Vec h_ua1 = pseudo_solve(A, Vec(C.b * w - A1w));
      C.fuualpha1_corrected =
          C.fuualpha1 + v.dot(d2f_param(model, x0, params, h_uu, alpha1)) +
          2.0 * v.dot(d2f(model, x0, params, w, h_ua1));
      C.e_corrected = (-C.b * C.d_corrected + C.fuualpha1_corrected * C.fualpha2) /
                      (2.0 * C.b * C.c);

      const double fscale = 1.0 + std::abs(C.b) + std::abs(C.d);
      C.e_nonzero_sufficient =
          std::abs(C.fuualpha1) <= 1e-6 * fscale && std::abs(C.d) > 1e-8 * fscale;
    }
  }
  return out;
}

double c_tolerance(const CoeffDetail& d) {
  return 1e-8 * (1.0 + std::abs(d.cpart3) + std::abs(d.cpart2));
}

}  // namespace

NullPair null_pair(const ModelSystem& model, const ParamMap& params) {
  model.require_admissible(params);
  const Vec x0 = model.dfe(params);
  const Mat A = jacobian(model, x0, params);
  const Eigen::Index n = A.rows();
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const double scale = inf_norm(A);
  const double tol = 1e-6 * scale;
  if (sv[n - 1] > tol) {
    std::ostringstream msg;
    msg << model.id << ": no near-zero eigenvalue at this point: smallest "
        << "singular value " << sv[n - 1] << " exceeds " << tol
        << " (spectral gap " << sv[n - 1] / scale << " relative)";
    throw NumericsError(msg.str());
  }
  if (n >= 2 && sv[n - 2] <= tol)
    throw NumericsError(model.id + ": non-simple zero eigenvalue");

  NullPair np;
  np.A = A;
  np.w = svd.matrixV().col(n - 1);
  np.v = svd.matrixU().col(n - 1);

  int piv = -1;
  double piv_abs = -1.0;
  for (int idx : model.infected_idx) {
    if (std::abs(np.w[idx]) > piv_abs) {
      piv_abs = std::abs(np.w[idx]);
      piv = idx;
    }
  }
  if (piv < 0 || piv_abs == 0.0)
    throw NumericsError(model.id + ": kernel vector has no infected component");
  np.w /= np.w[piv];
  const double denom = np.v.dot(np.w);
  if (std::abs(denom) < 1e-10)
    throw NumericsError(model.id + ": left and right null vectors are nearly orthogonal");
  np.v /= denom;

  np.residual_w = inf_norm(Vec(A * np.w));
  np.residual_v = inf_norm(Vec(A.transpose() * np.v));
  return np;
}

double coeff_a(const ModelSystem& model, const ParamMap& params) {
  return compute_detail(model, params, "", "", 0.0).C.a;
}

double coeff_b(const ModelSystem& model, const ParamMap& params,
               const std::string& alpha1) {
  return compute_detail(model, params, alpha1, "", 0.0).C.b;
}

double coeff_c(const ModelSystem& model, const ParamMap& params) {
  const CoeffDetail d = compute_detail(model, params, "", "", 0.0);
  // v . d2f(w,w) = 2a must vanish for c to be independent of the pseudo-solve.
  if (!d.C.a_is_zero())
    throw NumericsError(model.id + ": a != 0: c ill-defined");
  return d.C.c;
}

double coeff_d(const ModelSystem& model, const ParamMap& params,
               const std::string& alpha2) {
  const NullPair np = null_pair(model, params);
  const Vec x0 = model.dfe(params);
  return np.v.dot(d3f_param(model, x0, params, np.w, np.w, alpha2));
}

double coeff_e(const ModelSystem& model, const ParamMap& params,
               const std::string& alpha1, const std::string& alpha2) {
  const CoeffDetail d = compute_detail(model, params, alpha1, alpha2, 0.0);
  if (std::abs(d.C.c) <= c_tolerance(d))
    throw NumericsError(model.id + ": degenerate: e undefined (c = 0 within tolerance)");
  return d.C.e;
}

CenterCoefficients coefficients(const ModelSystem& model, const ParamMap& params,
                                const std::string& alpha1, const std::string& alpha2) {
  return compute_detail(model, params, alpha1, alpha2, 0.0).C;
}

double coeff_c_shifted(const ModelSystem& model, const ParamMap& params, double tau) {
  return compute_detail(model, params, "", "", tau).C.c;
}

BifClass classify(const CenterCoefficients& coeffs) {
  if (!(coeffs.b > 0.0))
    throw NumericsError("hypothesis violated: b must be positive (b = " +
                        std::to_string(coeffs.b) + ")");
  BifClass out;
  out.a_zero = coeffs.a_is_zero();
  if (!out.a_zero) {
    out.primary = coeffs.a > 0.0 ? "backward" : "forward";
    out.flags = {out.primary};
    return out;
  }
  if (!coeffs.e_is_nonzero()) {
    out.primary = "degenerate";
    out.flags = {"degenerate"};
    return out;
  }
  const double ce = coeffs.c * coeffs.e;
  out.primary = ce < 0.0 ? "unfolded-backward" : "unfolded-forward";
  out.flags = {out.primary};
  if (coeffs.e > 0.0) {
    if (coeffs.c < 0.0)
      out.flags.push_back("two-states-below-threshold");
    else if (coeffs.c > 0.0)
      out.flags.push_back("two-states-above-threshold");
  }
  return out;
}

}  // namespace bifurcat
