#pragma once

#include <functional>
#include <optional>

#include <Eigen/Dense>

namespace nvbath {

/// Residuals r(p) and, when `jacobian` is non-null, dr/dp.
using ResidualFunction =
    std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& residual, Eigen::MatrixXd* jacobian)>;

struct LmOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-14;  // on |J^T r|, relative to the cost scale
  double step_tolerance = 1e-13;      // relative to |p|
  std::optional<Eigen::VectorXd> lower;
  std::optional<Eigen::VectorXd> upper;
};

struct LmOutcome {
  Eigen::VectorXd params;
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
  double cost = 0.0;  // |r|^2
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton (Levenberg-Marquardt with Marquardt scaling). Steps
/// are projected onto the box when bounds are given. Only cost-decreasing
/// steps are accepted, so the returned cost never exceeds the starting cost.
LmOutcome levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd start,
                              const LmOptions& options = {});

}  // namespace nvbath
