#pragma once

// Photon-count readout of the electron population and two-qubit
// maximum-likelihood tomography built on top of it.
//
// Each tomography setting is a two-qubit Pauli observable sa (x) sb,
// a, b in {I, X, Y, Z}. Local basis rotations followed by a
// nitrogen-conditional electron flip map the observable's parity onto the
// electron, so the measured population is P0 = (1 + <sa (x) sb>) / 2.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nvbath/density_matrix.hpp"
#include "nvbath/errors.hpp"

namespace nvbath {

struct PauliSetting {
  char electron = 'I';
  char nitrogen = 'I';

  [[nodiscard]] std::string label() const { return {electron, nitrogen}; }
  static PauliSetting parse(std::string_view label);
  bool operator==(const PauliSetting&) const = default;
};

/// All 16 settings, II, IX, ..., ZZ.
std::vector<PauliSetting> pauli_settings();

ComplexMatrix pauli_observable(const PauliSetting& setting);

/// Electron |m_s=0> population read out for a setting.
double setting_probability(const DensityMatrix& rho, const PauliSetting& setting);

struct ReadoutCalibration {
  // Mean photons per shot in the detection window for m_s = 0 and m_s = -1.
  // Typical room-temperature contrast; not measured values.
  double rate_bright = 0.03;
  double rate_dark = 0.02;

  void validate() const;
};

struct CountsRecord {
  std::string setting;
  std::uint64_t shots = 1;
  double c_signal = 0.0;
  double c_bright = 0.0;
  double c_dark = 0.0;

  void validate() const;
  bool operator==(const CountsRecord&) const = default;
};

/// (C_signal - C_dark) / (C_bright - C_dark), deliberately unclipped.
/// Throws InvalidInput when there is no contrast.
double readout_probability(const CountsRecord& record);

enum class CountMode {
  Poisson,  // counts drawn from Poisson distributions
  Exact,    // counts equal their means, so readout_probability is exact
};

/// Synthetic counts for each setting. Setting i draws from its own generator
/// seeded from (seed, i), so results do not depend on evaluation order.
std::vector<CountsRecord> simulate_counts(const DensityMatrix& rho,
                                          std::span<const PauliSetting> settings,
                                          std::uint64_t shots, const ReadoutCalibration& cal,
                                          std::uint64_t seed, CountMode mode = CountMode::Poisson);

/// Least-squares state from the measured populations, projected onto the
/// physical set. Used to seed the likelihood maximization.
DensityMatrix linear_inversion(std::span<const CountsRecord> records);

struct MleOptions {
  int max_iterations = 2000;
  double gradient_tolerance = 1e-13;
};

struct MleResult {
  DensityMatrix rho;
  int iterations = 0;
  double gradient_norm = 0.0;
  double log_likelihood = 0.0;  // per shot
};

class MleConvergenceError : public NumericalFailure {
 public:
  MleConvergenceError(const std::string& what, DensityMatrix best, double gradient_norm)
      : NumericalFailure(what), best_(std::move(best)), gradient_norm_(gradient_norm) {}
  [[nodiscard]] const DensityMatrix& best() const { return best_; }
  [[nodiscard]] double gradient_norm() const { return gradient_norm_; }

 private:
  DensityMatrix best_;
  double gradient_norm_;
};

/// Maximizes the Poisson log-likelihood of the signal counts over
/// rho = T^dagger T / Tr(T^dagger T), T lower triangular (16 real
/// parameters), by damped Newton steps on the observed information. The settings must cover all 15
/// non-identity Pauli observables.
MleResult mle_reconstruct(std::span<const CountsRecord> records, const ReadoutCalibration& cal,
                          const MleOptions& options = {});

}  // namespace nvbath
