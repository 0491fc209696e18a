#pragma once

// Filter-function description of CPMG dephasing.
//
//   W(t) = exp(-chi),  chi = (1/pi) * integral dw S(w) / w^2 * F_N(w t)
//   F_N(x) = 8 sin^2(x/2) sin^4(x/4N) / cos^2(x/2N)
//
// F_N peaks at x = N (2j+1) pi, i.e. at w = (2j+1) pi / (2 tau) for t = 2 N tau.

#include <span>
#include <string>
#include <vector>

#include "nvbath/dynamics.hpp"

namespace nvbath {

struct NoiseSpectrum {
  std::vector<double> omega;  // rad/us, strictly increasing
  std::vector<double> s;      // rad/us, nonnegative

  void validate() const;
  /// Linear interpolation; zero outside the grid.
  [[nodiscard]] double at(double w) const;
};

struct FilterEvaluation {
  std::vector<double> omega_t;
  std::vector<double> f;
  int n = 0;
};

/// F_N(omega_t) for even n >= 2, finite at the removable singularities
/// omega_t = N (2j+1) pi where it equals 2 N^2.
double filter_function(double omega_t, int n);

FilterEvaluation evaluate_filter(std::span<const double> omega_t, int n);

struct ChiResult {
  double chi = 0.0;
  double w = 1.0;
  double p0 = 1.0;
};

/// Overlap integral of a tabulated spectrum with the CPMG filter.
///
/// The spectrum is interpolated linearly and treated as zero beyond its
/// grid. Each grid interval is split into pieces no wider than pi/t and
/// integrated with adaptive Gauss-Kronrod, so the sharp filter peaks are
/// resolved regardless of how coarse the spectrum grid is. The grid must
/// reach from the first filter harmonic out to the third, otherwise
/// CoverageError is thrown.
ChiResult chi_from_spectrum(const NoiseSpectrum& spectrum, double t, int n);

struct SkippedPoint {
  double tau = 0.0;
  double w = 0.0;
  std::string reason;
};

struct SpectrumReconstruction {
  NoiseSpectrum spectrum;
  std::vector<SkippedPoint> skipped;
};

/// First-harmonic inversion: each (tau, n, W) point maps to
/// S(pi / (2 tau)) = pi^2 (-ln W) / (4 t) with t = 2 n tau.
///
/// Points with W <= 0 are skipped and reported. W > 1 maps to S = 0.
/// Points landing on the same frequency are averaged. Higher filter
/// harmonics are not deconvolved.
SpectrumReconstruction reconstruct_spectrum(std::span<const CoherenceTrace> traces);

}  // namespace nvbath
