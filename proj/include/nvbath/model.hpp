#pragma once

// NV electron, host 14N and a small 13C bath: constants, carbon registry and
// Hamiltonian construction.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nvbath/spincore.hpp"

namespace nvbath {

/// Constants in the units they are usually quoted in. Conversion to rad/us
/// happens in the functions that build Hamiltonians.
struct PhysicalConstants {
  double delta_ghz = 2.87;           // zero-field splitting
  double q_mhz = -4.945;             // nitrogen quadrupole
  double gamma_e_mhz_per_g = 2.8;    // electron
  double gamma_n_khz_per_g = -0.308; // nitrogen
  double gamma_c_khz_per_g = -1.07;  // carbon
  double a_par_mhz = -2.162;         // nitrogen parallel hyperfine
  double b_z_gauss = 479.0;

  /// Throws InvalidInput unless b_z > 0 and delta > 0.
  void validate() const;
  bool operator==(const PhysicalConstants&) const = default;
};

struct CarbonParams {
  std::string label;
  double a_zz_khz = 0.0;
  double a_xz_khz = 0.0;
  std::optional<double> sigma_zz_khz;
  std::optional<double> sigma_xz_khz;

  void validate() const;
  bool operator==(const CarbonParams&) const = default;
};

inline constexpr std::size_t kMaxCarbons = 8;

struct SystemConfig {
  PhysicalConstants constants;
  std::vector<CarbonParams> carbons;
  // Electron levels kept in the register: 2 = {m_s=0, m_s=-1}, 3 = full spin 1.
  int electron_levels = 2;
  // Nitrogen levels kept: 2 = {m_I=+1, m_I=0}, 3 = full spin 1.
  int nitrogen_levels = 2;
  // Draw carbon parameters from their uncertainties (see sample_carbons).
  bool sample_uncertainties = false;

  void validate() const;
  bool operator==(const SystemConfig&) const = default;
};

/// Constants and the six calibrated carbons used throughout the examples.
SystemConfig default_config();

/// Bare carbon precession, 2 pi gamma_c B_z in rad/us. Sign follows gamma_c.
double larmor_frequency(const PhysicalConstants& c);

/// Carbon Hamiltonian conditioned on the electron level ms in {0, -1}:
/// (w_L + 2 pi ms A_zz) I_z + (2 pi ms A_xz) I_x.
ComplexMatrix conditional_carbon_hamiltonian(const CarbonParams& k,
                                             const PhysicalConstants& c, int ms);

/// Coefficients of the conditional Hamiltonian, h = z I_z + x I_x.
struct ConditionalField {
  double z = 0.0;
  double x = 0.0;
};
ConditionalField conditional_field(const CarbonParams& k, const PhysicalConstants& c, int ms);

enum class Frame { Lab, Rotating };

/// Full register Hamiltonian over electron (x) nitrogen (x) carbons.
///
/// The rotating frame drops the electron zero-field and Zeeman terms and the
/// nitrogen Zeeman and quadrupole terms; the A_par S_z I_nz coupling and all
/// carbon terms remain. Throws CapacityError above kMaxCarbons.
ComplexMatrix build_full_hamiltonian(const SystemConfig& cfg, Frame frame);

/// S_z restricted to the retained electron levels.
ComplexMatrix electron_sz(int levels);
/// I_nz restricted to the retained nitrogen levels.
ComplexMatrix nitrogen_iz(int levels);

/// Copy of cfg with each carbon's couplings drawn from a normal distribution
/// with the stored 1-sigma uncertainties. Carbons without uncertainties are
/// left untouched. Deterministic for a given seed.
SystemConfig sample_carbons(const SystemConfig& cfg, std::uint64_t seed);

}  // namespace nvbath
