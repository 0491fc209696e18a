#pragma once

// Pulse-sequence propagation for the electron-nitrogen pair and its carbon bath.
//
// Fast path: the bath Hamiltonian commutes with S_z, so each carbon evolves
// under one of two conditional Hamiltonians depending on the electron branch.
// With carbons maximally mixed, the electron coherence factorizes into a
// product of per-carbon overlaps M_k = Re{ Tr[U0 U1^dagger] / 2 }.
//
// Oracle path: dense propagation of the whole register followed by a
// partial trace. Both paths must agree to 1e-8.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "nvbath/density_matrix.hpp"
#include "nvbath/model.hpp"

namespace nvbath {

using Matrix2c = Eigen::Matrix2cd;

struct FreeEvolution {
  double t = 0.0;
};
struct HahnEcho {
  double tau = 0.0;  // tau - pi - tau
};
struct Cpmg {
  double tau = 0.0;  // half inter-pulse spacing
  int n = 2;         // number of pi pulses
};
struct Preparation {
  double tau1 = 0.0;  // tau1 - pi - 2 tau1 - pi - tau1 around the rf gate
};
using PulseSequence = std::variant<FreeEvolution, HahnEcho, Cpmg, Preparation>;

void validate(const PulseSequence& seq);
double total_time(const PulseSequence& seq);

struct CpmgUnit {
  Matrix2c v0;  // carbon propagator for the branch starting in m_s = 0
  Matrix2c v1;  // branch starting in m_s = -1
};

/// exp(-i (z I_z + x I_x) t) in closed form.
Matrix2c spin_half_propagator(double z, double x, double t);

/// Propagators for one tau - pi - 2tau - pi - tau unit, ideal instantaneous pulses.
CpmgUnit cpmg_unit_propagators(const CarbonParams& k, const PhysicalConstants& c, double tau);

/// Coherence factor of one maximally mixed carbon after CPMG(tau, n).
/// n must be even and nonnegative (n = 0 gives 1).
double carbon_coherence_factor(const CarbonParams& k, const PhysicalConstants& c, double tau,
                               int n);

/// Factor plus its derivatives with respect to A_zz and A_xz (per kHz).
struct FactorGradient {
  double value = 1.0;
  double d_azz = 0.0;
  double d_axz = 0.0;
};
FactorGradient carbon_coherence_gradient(const CarbonParams& k, const PhysicalConstants& c,
                                         double tau, int n);

struct BathCoherence {
  double w = 1.0;
  double p0 = 1.0;  // (w + 1) / 2
};

/// Product of the per-carbon factors.
BathCoherence bath_coherence(std::span<const CarbonParams> carbons, const PhysicalConstants& c,
                             double tau, int n);

/// Electron coherence for a general sequence on the factorized path. Unlike
/// bath_coherence this accepts odd pulse counts, Hahn echoes and free decay.
double sequence_coherence(std::span<const CarbonParams> carbons, const PhysicalConstants& c,
                          const PulseSequence& seq);

/// Deterministic phase of the |00><11| element picked up from A_par S_z I_nz
/// during `seq` with two retained nitrogen levels.
double pair_phase(const PhysicalConstants& c, const PulseSequence& seq);

/// Bell pair with its coherence scaled by w and rotated by phi:
/// populations 1/2 on |00>, |11>; <00|rho|11> = (w/2) e^{i phi}.
DensityMatrix dephased_bell_state(double w, double phi);

struct CoherenceTrace {
  std::string axis = "tau_us";  // "tau_us" or "t_us"
  std::vector<double> x;
  std::vector<double> w;
  int n = 0;
  std::vector<std::string> carbons;
  std::string frame = "rotating";
};

/// W over a tau grid at fixed n. Points are independent; `threads` > 1
/// spreads them over worker threads without changing the result.
CoherenceTrace coherence_scan(std::span<const CarbonParams> carbons, const PhysicalConstants& c,
                              std::span<const double> taus, int n, unsigned threads = 1);

struct EntanglementTrace {
  double tau = 0.0;
  std::vector<int> n;
  std::vector<double> t;
  std::vector<double> w;
  std::vector<double> c;
};

struct EntanglementOptions {
  // When set, the bath also evolves during the preparation echo before the CPMG train.
  std::optional<double> prep_tau1;
};

/// Concurrence of the pair after CPMG(tau, n) for each n (even, ascending).
EntanglementTrace entanglement_trace(std::span<const CarbonParams> carbons,
                                     const PhysicalConstants& c, double tau,
                                     std::span<const int> n_values,
                                     const EntanglementOptions& options = {});

/// Dense evolution of the full register.
///
/// `initial` is the electron-nitrogen qubit pair (electron qubit {m_s=0,
/// m_s=-1}, nitrogen qubit {m_I=+1, m_I=0}); carbons start maximally mixed.
/// Pulses are ideal X gates on the electron qubit levels. Returns the 4x4
/// reduced pair state.
DensityMatrix full_oracle_propagate(const SystemConfig& cfg, const PulseSequence& seq,
                                    const DensityMatrix& initial);

/// Signed electron coherence from the oracle for a Bell input:
/// Re{ 2 <00|rho|11> e^{-i phi} } with phi = pair_phase.
double oracle_coherence(const SystemConfig& cfg, const PulseSequence& seq);

/// Free-induction decay under a quasi-static Gaussian detuning of standard
/// deviation sigma (rad/us): exp(-sigma^2 t^2 / 2).
double quasi_static_coherence(double sigma, double t);

/// Detuning spread giving a 1/e time of t_c: sqrt(2) / t_c.
double sigma_for_coherence_time(double t_c);

/// Inclusive grid lo, lo + step, ... <= hi + step/2, computed by index to avoid drift.
std::vector<double> linear_grid(double lo, double hi, double step);

/// Even pulse counts from n_min to n_max inclusive in steps of 2.
std::vector<int> even_counts(int n_min, int n_max);

}  // namespace nvbath
