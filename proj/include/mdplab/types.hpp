#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mdplab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Tolerance for simplex/stochasticity checks on freshly constructed objects.
inline constexpr double kConstructTol = 1e-12;
// Tolerance after arithmetic (kernel products, roll-forwards, solves).
inline constexpr double kDerivedTol = 1e-10;

// Thrown when a kernel has no unique stationary distribution.
struct NotErgodicError : std::runtime_error {
  explicit NotErgodicError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an environment fails one of the standing assumptions
// (stationary mass bounded below, one-step contraction).
struct AssumptionViolation : std::runtime_error {
  explicit AssumptionViolation(const std::string& what) : std::runtime_error(what) {}
};

// max over rows of the row L1 sum; the norm used for policy differences.
inline double one_inf_norm(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

inline double l1_distance(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().sum();
}

}  // namespace mdplab
