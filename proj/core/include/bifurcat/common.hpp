#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace bifurcat {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;

// Raised when inputs violate a model's domain: inadmissible parameters,
// dimension mismatches, singular incidence denominators.
class ModelError : public std::runtime_error {
public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a numerical routine cannot deliver its contract: non-simple
// kernels, missing zero eigenvalues, degenerate coefficient requests.
class NumericsError : public std::runtime_error {
public:
  explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

// Raised on malformed configuration, unknown identifiers, bad CLI input.
class UsageError : public std::runtime_error {
public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

inline double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
inline double inf_norm(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// |x - y| <= atol + rtol * max(|x|, |y|)
inline bool approx(double x, double y, double rtol, double atol = 0.0) {
  return std::abs(x - y) <= atol + rtol * std::max(std::abs(x), std::abs(y));
}

}  // namespace bifurcat
