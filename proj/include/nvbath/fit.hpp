#pragma once

// Decay-constant fits and hyperfine calibration against simulated CPMG traces.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvbath/dynamics.hpp"
#include "nvbath/metrics.hpp"

namespace nvbath {

struct FitParameter {
  std::string name;
  double value = 0.0;
  double sigma = 0.0;
};

struct FitResult {
  std::vector<FitParameter> params;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;

  /// Throws std::out_of_range for an unknown name.
  [[nodiscard]] const FitParameter& param(std::string_view name) const;
  [[nodiscard]] double value(std::string_view name) const { return param(name).value; }
  [[nodiscard]] double sigma(std::string_view name) const { return param(name).sigma; }

  /// `name = value` lines plus residual_norm, converged and iterations.
  [[nodiscard]] std::string to_key_value() const;
  [[nodiscard]] std::string to_json() const;
};

enum class FitIssue { NonConvergence, UnboundedParameter, BoundaryHit, Degenerate };

class FitError : public std::runtime_error {
 public:
  FitError(FitIssue issue, const std::string& what, std::optional<FitResult> partial = {})
      : std::runtime_error(what), issue_(issue), partial_(std::move(partial)) {}
  [[nodiscard]] FitIssue issue() const { return issue_; }
  [[nodiscard]] const std::optional<FitResult>& partial() const { return partial_; }

 private:
  FitIssue issue_;
  std::optional<FitResult> partial_;
};

/// Least-squares fit of y = a exp(-(t/T)^2) (+ floor). Parameters are named
/// "a", "T" and, with a floor, "floor". Needs at least 4 points with t >= 0.
///
/// Raises FitError(UnboundedParameter) when the data cannot bound T (fitted T
/// beyond ten times the sampled span) and FitError(NonConvergence) after 500
/// iterations.
FitResult fit_gaussian_decay(std::span<const TimedValue> trace, bool with_floor = false);

struct HyperfineBounds {
  double a_zz_min = -100.0;
  double a_zz_max = 100.0;
  double a_xz_min = 0.0;
  double a_xz_max = 150.0;
};

struct CalibrationOptions {
  int grid_points = 41;  // per axis
  int max_iterations = 200;
};

/// Fits (A_zz, A_xz) of one carbon to a measured CPMG tau scan with the other
/// carbons held fixed. Coarse grid over the bounds box, then bounded
/// Levenberg-Marquardt from the best grid point. Parameters are "a_zz_khz" and
/// "a_xz_khz".
///
/// Raises FitError(Degenerate) when the residual does not depend on A_zz at
/// the best grid row (no transverse coupling to see), and
/// FitError(BoundaryHit) when the best grid point lies on the box edge.
FitResult calibrate_hyperfine(const CoherenceTrace& measured, std::size_t k_index,
                              const HyperfineBounds& bounds,
                              std::span<const CarbonParams> fixed_others,
                              const PhysicalConstants& constants,
                              const CalibrationOptions& options = {});

/// Sum of squared residuals of the calibration model at one parameter point.
double calibration_cost(const CoherenceTrace& measured, double a_zz_khz, double a_xz_khz,
                        std::span<const CarbonParams> fixed_others,
                        const PhysicalConstants& constants);

/// "value(u)" with the uncertainty in units of the last shown digit, e.g.
/// -77.02(3). Falls back to plain formatting when sigma is zero.
std::string format_with_uncertainty(double value, double sigma);

}  // namespace nvbath
