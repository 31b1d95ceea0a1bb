#pragma once

#include <functional>
#include <string>

#include "bifurcat/model.hpp"

namespace bifurcat {

// Directional numerical differentiation. All routines use central stencils
// with one level of Richardson extrapolation; directions are normalized
// internally so accuracy is independent of direction magnitude. Mixed
// directions are obtained from polarization identities, so only O(1)
// one-dimensional stencils are evaluated per call. Stateless and reentrant.

using VecFn = std::function<Vec(const Vec&)>;

// Sum_{j,k} d^2 f / dx_j dx_k * u1_j u2_k, componentwise.
Vec d2f(const VecFn& f, const Vec& x, const Vec& u1, const Vec& u2);
Vec d2f(const ModelSystem& model, const Vec& x, const ParamMap& params,
        const Vec& u1, const Vec& u2);

// Sum_{j,k,l} d^3 f / dx_j dx_k dx_l * u1_j u2_k u3_l, componentwise.
Vec d3f(const VecFn& f, const Vec& x, const Vec& u1, const Vec& u2, const Vec& u3);
Vec d3f(const ModelSystem& model, const Vec& x, const ParamMap& params,
        const Vec& u1, const Vec& u2, const Vec& u3);

// Full Jacobian d f / dx.
Mat jacobian(const VecFn& f, const Vec& x);
Mat jacobian(const ModelSystem& model, const Vec& x, const ParamMap& params);

// Mixed state-parameter derivatives: Sum_j d^2 f / dx_j dp * u_j and
// Sum_{j,k} d^3 f / dx_j dx_k dp * u1_j u2_k.
Vec d2f_param(const ModelSystem& model, const Vec& x, const ParamMap& params,
              const Vec& u, const std::string& pname);
Vec d3f_param(const ModelSystem& model, const Vec& x, const ParamMap& params,
              const Vec& u1, const Vec& u2, const std::string& pname);

// First derivative of a scalar-to-vector map, central + Richardson; used for
// parameter columns of extended systems.
Vec dparam(const std::function<Vec(double)>& g, double t0, double scale);

}  // namespace bifurcat
