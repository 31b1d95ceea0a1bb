#include "bifurcat/numdiff.hpp"

#include <cmath>
#include <limits>

namespace bifurcat {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Step bases chosen by measured accuracy of the Richardson-extrapolated
// stencils (~1e-12 for second order, ~1e-9 for third, ~1e-10 for the
// jacobian on systems with closed-form derivatives).
const double kStep2 = std::pow(kEps, 1.0 / 6.0);
const double kStep3 = std::pow(kEps, 1.0 / 5.0);
const double kStepJ = std::pow(kEps, 1.0 / 5.0);

double state_scale(const Vec& x) { return 1.0 + inf_norm(x); }

Vec dir_second(const VecFn& f, const Vec& x, const Vec& u, double h) {
  return (f(x + h * u) - 2.0 * f(x) + f(x - h * u)) / (h * h);
}

Vec dir_third(const VecFn& f, const Vec& x, const Vec& u, double h) {
  return (f(x + 2.0 * h * u) - 2.0 * f(x + h * u) + 2.0 * f(x - h * u) -
          f(x - 2.0 * h * u)) /
         (2.0 * h * h * h);
}

template <typename Stencil>
Vec richardson(Stencil stencil, const VecFn& f, const Vec& x, const Vec& u, double h) {
  return (4.0 * stencil(f, x, u, h / 2.0) - stencil(f, x, u, h)) / 3.0;
}

// Binds one perturbed parameter value into a state-only callable.
VecFn at_param(const ModelSystem& model, const ParamMap& params,
               const std::string& pname, double offset) {
  ParamMap q = params.with(pname, params.at(pname) + offset);
  return [&model, q](const Vec& x) { return model.rhs(x, q); };
}

}  // namespace

Vec d2f(const VecFn& f, const Vec& x, const Vec& u1, const Vec& u2) {
  const double n1 = inf_norm(u1), n2 = inf_norm(u2);
  if (n1 == 0.0 || n2 == 0.0) return Vec::Zero(f(x).size());
  const double h = kStep2 * state_scale(x);
  const Vec a = u1 / n1, b = u2 / n2;
  if (inf_norm(Vec(a - b)) == 0.0)
    return n1 * n2 * richardson(dir_second, f, x, a, h);
  // Polarization: Q(a+b) - Q(a-b) = 4 B(a,b) for the symmetric form B.
  const Vec p = a + b, m = a - b;
  Vec out = richardson(dir_second, f, x, p, h);
  if (inf_norm(m) > 0.0) out -= richardson(dir_second, f, x, m, h);
  return n1 * n2 * out / 4.0;
}

Vec d3f(const VecFn& f, const Vec& x, const Vec& u1, const Vec& u2, const Vec& u3) {
  const double n1 = inf_norm(u1), n2 = inf_norm(u2), n3 = inf_norm(u3);
  if (n1 == 0.0 || n2 == 0.0 || n3 == 0.0) return Vec::Zero(f(x).size());
  const double h = kStep3 * state_scale(x);
  const Vec a = u1 / n1, b = u2 / n2, c = u3 / n3;
  Vec total = Vec::Zero(f(x).size());
  for (int s2 : {1, -1}) {
    for (int s3 : {1, -1}) {
      const Vec z = a + double(s2) * b + double(s3) * c;
      if (inf_norm(z) > 0.0)
        total += double(s2 * s3) * richardson(dir_third, f, x, z, h);
    }
  }
  return n1 * n2 * n3 * total / 24.0;
}

Mat jacobian(const VecFn& f, const Vec& x) {
  const Eigen::Index n = x.size();
  const Vec fx = f(x);
  Mat J(fx.size(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = kStepJ * (1.0 + std::abs(x[j]));
    Vec e = Vec::Zero(n);
    e[j] = 1.0;
    const Vec d1 = (f(x + h * e) - f(x - h * e)) / (2.0 * h);
    const Vec d2 = (f(x + (h / 2.0) * e) - f(x - (h / 2.0) * e)) / h;
    J.col(j) = (4.0 * d2 - d1) / 3.0;
  }
  return J;
}

Vec d2f(const ModelSystem& model, const Vec& x, const ParamMap& params,
        const Vec& u1, const Vec& u2) {
  return d2f([&](const Vec& xx) { return model.rhs(xx, params); }, x, u1, u2);
}

Vec d3f(const ModelSystem& model, const Vec& x, const ParamMap& params,
        const Vec& u1, const Vec& u2, const Vec& u3) {
  return d3f([&](const Vec& xx) { return model.rhs(xx, params); }, x, u1, u2, u3);
}

Mat jacobian(const ModelSystem& model, const Vec& x, const ParamMap& params) {
  return jacobian([&](const Vec& xx) { return model.rhs(xx, params); }, x);
}

Vec d2f_param(const ModelSystem& model, const Vec& x, const ParamMap& params,
              const Vec& u, const std::string& pname) {
  const double nu = inf_norm(u);
  if (nu == 0.0) return Vec::Zero(model.n);
  const Vec a = u / nu;
  const double h = kStep2 * state_scale(x);
  const double k = kStep2 * (1.0 + std::abs(params.at(pname)));
  // Mixed 4-point stencil in (state direction, parameter), one Richardson level.
  auto fd = [&](double hh, double kk) -> Vec {
    const VecFn fp = at_param(model, params, pname, kk);
    const VecFn fm = at_param(model, params, pname, -kk);
    return (fp(x + hh * a) - fm(x + hh * a) - fp(x - hh * a) + fm(x - hh * a)) /
           (4.0 * hh * kk);
  };
  return nu * (4.0 * fd(h / 2.0, k / 2.0) - fd(h, k)) / 3.0;
}

Vec d3f_param(const ModelSystem& model, const Vec& x, const ParamMap& params,
              const Vec& u1, const Vec& u2, const std::string& pname) {
  const double k = kStep3 * (1.0 + std::abs(params.at(pname)));
  auto second_at = [&](double offset) -> Vec {
    return d2f(at_param(model, params, pname, offset), x, u1, u2);
  };
  auto slope = [&](double kk) -> Vec {
    return (second_at(kk) - second_at(-kk)) / (2.0 * kk);
  };
  return (4.0 * slope(k / 2.0) - slope(k)) / 3.0;
}

Vec dparam(const std::function<Vec(double)>& g, double t0, double scale) {
  const double h = kStepJ * (1.0 + std::abs(t0)) * scale;
  const Vec d1 = (g(t0 + h) - g(t0 - h)) / (2.0 * h);
  const Vec d2 = (g(t0 + h / 2.0) - g(t0 - h / 2.0)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace bifurcat
