#include "nvbath/least_squares.hpp"

#include <algorithm>
#include <cmath>

namespace nvbath {

LmOutcome levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd start,
                              const LmOptions& options) {
  auto clamp_box = [&](Eigen::VectorXd p) {
    if (options.lower) p = p.cwiseMax(*options.lower);
    if (options.upper) p = p.cwiseMin(*options.upper);
    return p;
  };

  LmOutcome out;
  out.params = clamp_box(std::move(start));
  f(out.params, out.residual, &out.jacobian);
  out.cost = out.residual.squaredNorm();

  double lambda = 1e-3;
  for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
    const Eigen::MatrixXd& j = out.jacobian;
    const Eigen::VectorXd g = j.transpose() * out.residual;
    const Eigen::MatrixXd jtj = j.transpose() * j;
    if (g.norm() <= options.gradient_tolerance * (1.0 + out.cost) || out.cost == 0.0) {
      out.converged = true;
      break;
    }

    bool accepted = false;
    bool tiny_step = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd a = jtj;
      const double floor = 1e-12 * std::max(jtj.diagonal().maxCoeff(), 1e-300);
      a.diagonal().array() += lambda * jtj.diagonal().array().max(floor);
      const Eigen::VectorXd step = a.ldlt().solve(-g);
      const Eigen::VectorXd trial = clamp_box(out.params + step);
      const Eigen::VectorXd actual = trial - out.params;
      if (actual.norm() <= options.step_tolerance * (out.params.norm() + options.step_tolerance)) {
        tiny_step = true;
        break;
      }
      Eigen::VectorXd r;
      f(trial, r, nullptr);
      const double cost = r.squaredNorm();
      if (std::isfinite(cost) && cost < out.cost) {
        out.params = trial;
        f(out.params, out.residual, &out.jacobian);
        out.cost = out.residual.squaredNorm();
        lambda = std::max(lambda / 5.0, 1e-15);
        accepted = true;
        break;
      }
      lambda *= 3.0;
    }
    if (tiny_step || !accepted) {
      // Nothing left to gain at this precision.
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace nvbath
