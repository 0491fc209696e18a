#include "nvbath/fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "nvbath/errors.hpp"
#include "nvbath/least_squares.hpp"

namespace nvbath {
namespace {

std::vector<double> covariance_sigmas(const LmOutcome& fit) {
  const auto m = fit.residual.size();
  const auto p = fit.params.size();
  std::vector<double> out(static_cast<std::size_t>(p), 0.0);
  if (m <= p) return out;
  const double s2 = fit.cost / static_cast<double>(m - p);
  const Eigen::MatrixXd jtj = fit.jacobian.transpose() * fit.jacobian;
  const Eigen::MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse() * s2;
  for (Eigen::Index i = 0; i < p; ++i) out[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, cov(i, i)));
  return out;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9e", x);
  return buf;
}

}  // namespace

const FitParameter& FitResult::param(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("FitResult: no parameter named " + std::string(name));
}

std::string FitResult::to_key_value() const {
  std::ostringstream out;
  for (const auto& p : params) {
    out << p.name << " = " << fmt(p.value) << "\n" << p.name << "_sigma = " << fmt(p.sigma) << "\n";
  }
  out << "residual_norm = " << fmt(residual_norm) << "\n"
      << "converged = " << (converged ? "true" : "false") << "\n"
      << "iterations = " << iterations << "\n";
  return out.str();
}

std::string FitResult::to_json() const {
  nlohmann::ordered_json j;
  j["params"] = nlohmann::ordered_json::array();
  for (const auto& p : params) {
    j["params"].push_back({{"name", p.name}, {"value", p.value}, {"sigma", p.sigma},
                           {"display", format_with_uncertainty(p.value, p.sigma)}});
  }
  j["residual_norm"] = residual_norm;
  j["converged"] = converged;
  j["iterations"] = iterations;
  return j.dump(2);
}

FitResult fit_gaussian_decay(std::span<const TimedValue> trace, bool with_floor) {
  if (trace.size() < 4) throw InvalidInput("fit_gaussian_decay: need at least 4 points");
  std::vector<TimedValue> pts(trace.begin(), trace.end());
  for (const auto& p : pts) {
    if (!(p.t >= 0.0) || !std::isfinite(p.value)) {
      throw InvalidInput("fit_gaussian_decay: t must be nonnegative and values finite");
    }
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  const double t_max = pts.back().t;
  const double span = t_max - pts.front().t;
  if (!(t_max > 0.0)) throw InvalidInput("fit_gaussian_decay: all samples at t = 0");

  // Starting point: amplitude from the earliest sample, T from the first 1/e crossing.
  const double floor0 = with_floor ? pts.back().value : 0.0;
  const double a0 = pts.front().value - floor0;
  double t0 = 2.0 * t_max;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double prev = (pts[i - 1].value - floor0) / a0;
    const double cur = (pts[i].value - floor0) / a0;
    if (prev >= std::exp(-1.0) && cur < std::exp(-1.0)) {
      const double frac = (prev - std::exp(-1.0)) / (prev - cur);
      t0 = pts[i - 1].t + frac * (pts[i].t - pts[i - 1].t);
      break;
    }
  }
  t0 = std::max(t0, 1e-6 * t_max);

  const auto m = static_cast<Eigen::Index>(pts.size());
  const Eigen::Index np = with_floor ? 3 : 2;
  ResidualFunction f = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* j) {
    r.resize(m);
    if (j) j->resize(m, np);
    const double a = p(0);
    const double tc = p(1);
    const double fl = with_floor ? p(2) : 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double t = pts[static_cast<std::size_t>(i)].t;
      const double e = std::exp(-(t / tc) * (t / tc));
      r(i) = a * e + fl - pts[static_cast<std::size_t>(i)].value;
      if (j) {
        (*j)(i, 0) = e;
        (*j)(i, 1) = a * e * 2.0 * t * t / (tc * tc * tc);
        if (with_floor) (*j)(i, 2) = 1.0;
      }
    }
  };
  Eigen::VectorXd start(np);
  start(0) = a0;
  start(1) = t0;
  if (with_floor) start(2) = floor0;
  LmOptions opts;
  opts.max_iterations = 500;
  opts.lower = Eigen::VectorXd::Constant(np, -std::numeric_limits<double>::infinity());
  (*opts.lower)(1) = 1e-9 * t_max;
  const auto fit = levenberg_marquardt(f, start, opts);

  FitResult result;
  const auto sig = covariance_sigmas(fit);
  result.params.push_back({"a", fit.params(0), sig[0]});
  result.params.push_back({"T", fit.params(1), sig[1]});
  if (with_floor) result.params.push_back({"floor", fit.params(2), sig[2]});
  result.residual_norm = std::sqrt(fit.cost);
  result.converged = fit.converged;
  result.iterations = fit.iterations;

  const double limit = 10.0 * std::max(span, t_max);
  if (!std::isfinite(fit.params(1)) || fit.params(1) > limit) {
    throw FitError(FitIssue::UnboundedParameter,
                   "fit_gaussian_decay: decay time is not bounded by the data (T > " +
                       fmt(limit) + ")",
                   result);
  }
  if (!fit.converged) {
    throw FitError(FitIssue::NonConvergence,
                   "fit_gaussian_decay: no convergence after " + std::to_string(fit.iterations) +
                       " iterations",
                   result);
  }
  return result;
}

double calibration_cost(const CoherenceTrace& measured, double a_zz_khz, double a_xz_khz,
                        std::span<const CarbonParams> fixed_others,
                        const PhysicalConstants& constants) {
  const CarbonParams target{"target", a_zz_khz, a_xz_khz, {}, {}};
  double cost = 0.0;
  for (std::size_t i = 0; i < measured.x.size(); ++i) {
    const double others = bath_coherence(fixed_others, constants, measured.x[i], measured.n).w;
    const double sim = carbon_coherence_factor(target, constants, measured.x[i], measured.n) * others;
    cost += (sim - measured.w[i]) * (sim - measured.w[i]);
  }
  return cost;
}

FitResult calibrate_hyperfine(const CoherenceTrace& measured, std::size_t k_index,
                              const HyperfineBounds& bounds,
                              std::span<const CarbonParams> fixed_others,
                              const PhysicalConstants& constants,
                              const CalibrationOptions& options) {
  if (measured.axis != "tau_us" || measured.x.size() != measured.w.size() || measured.x.empty()) {
    throw InvalidInput("calibrate_hyperfine: expects a non-empty tau scan");
  }
  if (!(bounds.a_zz_max > bounds.a_zz_min) || !(bounds.a_xz_max > bounds.a_xz_min) ||
      !std::isfinite(bounds.a_zz_min + bounds.a_zz_max + bounds.a_xz_min + bounds.a_xz_max)) {
    throw InvalidInput("calibrate_hyperfine: bounds must be finite and non-empty");
  }
  if (options.grid_points < 3) throw InvalidInput("calibrate_hyperfine: grid needs >= 3 points");

  const std::size_t m = measured.x.size();
  std::vector<double> others(m);
  for (std::size_t i = 0; i < m; ++i) {
    others[i] = bath_coherence(fixed_others, constants, measured.x[i], measured.n).w;
  }
  auto model_cost = [&](double azz, double axz) {
    const CarbonParams target{"target", azz, axz, {}, {}};
    double cost = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = carbon_coherence_factor(target, constants, measured.x[i], measured.n) *
                           others[i] - measured.w[i];
      cost += r * r;
    }
    return cost;
  };

  // Coarse grid; rows are A_xz, columns A_zz.
  const int g = options.grid_points;
  auto grid_value = [g](double lo, double hi, int i) {
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(g - 1);
  };
  Eigen::MatrixXd costs(g, g);
  for (int ix = 0; ix < g; ++ix) {
    for (int iz = 0; iz < g; ++iz) {
      costs(ix, iz) = model_cost(grid_value(bounds.a_zz_min, bounds.a_zz_max, iz),
                                 grid_value(bounds.a_xz_min, bounds.a_xz_max, ix));
    }
  }
  Eigen::Index best_x = 0;
  Eigen::Index best_z = 0;
  const double best_cost = costs.minCoeff(&best_x, &best_z);
  const double best_azz = grid_value(bounds.a_zz_min, bounds.a_zz_max, static_cast<int>(best_z));
  const double best_axz = grid_value(bounds.a_xz_min, bounds.a_xz_max, static_cast<int>(best_x));

  const std::string label = "carbon slot " + std::to_string(k_index);
  FitResult grid_result;
  grid_result.params = {{"a_zz_khz", best_azz, 0.0}, {"a_xz_khz", best_axz, 0.0}};
  grid_result.residual_norm = std::sqrt(best_cost);

  const auto row = costs.row(best_x);
  if (row.maxCoeff() - row.minCoeff() <= 1e-12 * (1.0 + best_cost)) {
    throw FitError(FitIssue::Degenerate,
                   "calibrate_hyperfine: residual independent of A_zz for " + label +
                       " (no transverse coupling signature)",
                   grid_result);
  }
  if (best_x == 0 || best_x == g - 1 || best_z == 0 || best_z == g - 1) {
    throw FitError(FitIssue::BoundaryHit,
                   "calibrate_hyperfine: best grid point on the bounds for " + label +
                       "; widen the bounds",
                   grid_result);
  }

  ResidualFunction f = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* j) {
    const CarbonParams target{"target", p(0), p(1), {}, {}};
    r.resize(static_cast<Eigen::Index>(m));
    if (j) j->resize(static_cast<Eigen::Index>(m), 2);
    for (std::size_t i = 0; i < m; ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      if (j) {
        const auto grad = carbon_coherence_gradient(target, constants, measured.x[i], measured.n);
        r(idx) = grad.value * others[i] - measured.w[i];
        (*j)(idx, 0) = grad.d_azz * others[i];
        (*j)(idx, 1) = grad.d_axz * others[i];
      } else {
        r(idx) = carbon_coherence_factor(target, constants, measured.x[i], measured.n) * others[i] -
                 measured.w[i];
      }
    }
  };
  LmOptions opts;
  opts.max_iterations = options.max_iterations;
  opts.lower = Eigen::Vector2d(bounds.a_zz_min, bounds.a_xz_min);
  opts.upper = Eigen::Vector2d(bounds.a_zz_max, bounds.a_xz_max);
  const auto fit = levenberg_marquardt(f, Eigen::Vector2d(best_azz, best_axz), opts);

  FitResult result;
  const auto sig = covariance_sigmas(fit);
  result.params = {{"a_zz_khz", fit.params(0), sig[0]}, {"a_xz_khz", fit.params(1), sig[1]}};
  result.residual_norm = std::sqrt(fit.cost);
  result.converged = fit.converged;
  result.iterations = fit.iterations;
  if (!fit.converged) {
    throw FitError(FitIssue::NonConvergence,
                   "calibrate_hyperfine: refinement did not converge for " + label, result);
  }
  return result;
}

std::string format_with_uncertainty(double value, double sigma) {
  char buf[64];
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    std::snprintf(buf, sizeof buf, "%g", value);
    return buf;
  }
  // Decimal places so the uncertainty shows as a single leading digit.
  int decimals = -static_cast<int>(std::floor(std::log10(sigma)));
  double digit = std::round(sigma * std::pow(10.0, decimals));
  if (digit >= 10.0) {
    --decimals;
    digit = std::round(sigma * std::pow(10.0, decimals));
  }
  if (decimals <= 0) {
    const double scale = std::pow(10.0, -decimals);
    std::snprintf(buf, sizeof buf, "%.0f(%.0f)", std::round(value / scale) * scale, digit * scale);
  } else {
    std::snprintf(buf, sizeof buf, "%.*f(%.0f)", decimals, value, digit);
  }
  return buf;
}

}  // namespace nvbath
