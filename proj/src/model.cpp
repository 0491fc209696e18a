#include "nvbath/model.hpp"

#include <cmath>
#include <random>

#include "nvbath/errors.hpp"

namespace nvbath {

void PhysicalConstants::validate() const {
  if (!(b_z_gauss > 0.0)) throw InvalidInput("constants: b_z must be positive");
  if (!(delta_ghz > 0.0)) throw InvalidInput("constants: delta must be positive");
}

void CarbonParams::validate() const {
  if (!std::isfinite(a_zz_khz) || !std::isfinite(a_xz_khz)) {
    throw InvalidInput("carbon " + label + ": hyperfine values must be finite");
  }
  if ((sigma_zz_khz && *sigma_zz_khz < 0.0) || (sigma_xz_khz && *sigma_xz_khz < 0.0)) {
    throw InvalidInput("carbon " + label + ": uncertainties must be nonnegative");
  }
}

void SystemConfig::validate() const {
  constants.validate();
  if (carbons.size() > kMaxCarbons) {
    throw CapacityError("config: at most " + std::to_string(kMaxCarbons) + " carbons supported");
  }
  for (const auto& k : carbons) k.validate();
  if (electron_levels != 2 && electron_levels != 3) {
    throw InvalidInput("config: electron_levels must be 2 or 3");
  }
  if (nitrogen_levels != 2 && nitrogen_levels != 3) {
    throw InvalidInput("config: nitrogen_levels must be 2 or 3");
  }
}

SystemConfig default_config() {
  SystemConfig cfg;
  // Couplings in kHz; uncertainties are one unit in the last quoted digit.
  cfg.carbons = {
      {"C1", -77.02, 114.5, 0.03, 0.1},
      {"C2", 71.03, 58.7, 0.03, 0.3},
      {"C3", 4.0, 57.0, 1.0, 7.0},
      {"C4", -13.9, 65.0, 0.8, 4.0},
      {"C5", 16.0, 37.0, 5.0, 9.0},
      {"C6", -20.0, 41.0, 3.0, 10.0},
  };
  return cfg;
}

double larmor_frequency(const PhysicalConstants& c) {
  return khz_to_angular(c.gamma_c_khz_per_g * c.b_z_gauss);
}

ConditionalField conditional_field(const CarbonParams& k, const PhysicalConstants& c, int ms) {
  if (ms != 0 && ms != -1) {
    throw InvalidInput("conditional_carbon_hamiltonian: ms must be 0 or -1");
  }
  const double m = static_cast<double>(ms);
  return {larmor_frequency(c) + m * khz_to_angular(k.a_zz_khz), m * khz_to_angular(k.a_xz_khz)};
}

ComplexMatrix conditional_carbon_hamiltonian(const CarbonParams& k,
                                             const PhysicalConstants& c, int ms) {
  const auto f = conditional_field(k, c, ms);
  const auto ops = spin_operators(0.5);
  return f.z * ops.iz + f.x * ops.ix;
}

ComplexMatrix electron_sz(int levels) {
  if (levels == 3) return spin_operators(1.0).iz;
  if (levels == 2) {
    ComplexMatrix sz = ComplexMatrix::Zero(2, 2);
    sz(1, 1) = -1.0;
    return sz;
  }
  throw InvalidInput("electron_sz: levels must be 2 or 3");
}

ComplexMatrix nitrogen_iz(int levels) {
  if (levels == 3) return spin_operators(1.0).iz;
  if (levels == 2) {
    ComplexMatrix iz = ComplexMatrix::Zero(2, 2);
    iz(0, 0) = 1.0;
    return iz;
  }
  throw InvalidInput("nitrogen_iz: levels must be 2 or 3");
}

ComplexMatrix build_full_hamiltonian(const SystemConfig& cfg, Frame frame) {
  cfg.validate();
  const auto& c = cfg.constants;
  const std::size_t nc = cfg.carbons.size();
  const ComplexMatrix sz = electron_sz(cfg.electron_levels);
  const ComplexMatrix inz = nitrogen_iz(cfg.nitrogen_levels);
  const auto de = sz.rows();
  const auto dn = inz.rows();
  const auto half = spin_operators(0.5);

  // Embeds (electron op) (x) (nitrogen op) (x) (op on carbon `slot`, identity elsewhere).
  auto embed = [&](const ComplexMatrix& e_op, const ComplexMatrix& n_op,
                   const ComplexMatrix* c_op, std::size_t slot) {
    std::vector<ComplexMatrix> factors{e_op, n_op};
    for (std::size_t k = 0; k < nc; ++k) {
      factors.push_back(c_op != nullptr && k == slot ? *c_op : identity(2));
    }
    return kron_all(factors);
  };
  const ComplexMatrix ie = identity(de);
  const ComplexMatrix in = identity(dn);

  const ComplexMatrix ez = embed(sz, in, nullptr, 0);
  const ComplexMatrix nz = embed(ie, inz, nullptr, 0);
  ComplexMatrix h = mhz_to_angular(c.a_par_mhz) * (ez * nz);
  if (frame == Frame::Lab) {
    h += ghz_to_angular(c.delta_ghz) * (ez * ez);
    h += mhz_to_angular(c.gamma_e_mhz_per_g * c.b_z_gauss) * ez;
    h += khz_to_angular(c.gamma_n_khz_per_g * c.b_z_gauss) * nz;
    h += mhz_to_angular(c.q_mhz) * (nz * nz);
  }
  const double w_l = larmor_frequency(c);
  for (std::size_t k = 0; k < nc; ++k) {
    const auto& carbon = cfg.carbons[k];
    h += w_l * embed(ie, in, &half.iz, k);
    h += khz_to_angular(carbon.a_zz_khz) * embed(sz, in, &half.iz, k);
    h += khz_to_angular(carbon.a_xz_khz) * embed(sz, in, &half.ix, k);
  }
  return 0.5 * (h + h.adjoint());
}

SystemConfig sample_carbons(const SystemConfig& cfg, std::uint64_t seed) {
  SystemConfig out = cfg;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& k : out.carbons) {
    const double zz = normal(rng);
    const double xz = normal(rng);
    if (k.sigma_zz_khz) k.a_zz_khz += *k.sigma_zz_khz * zz;
    if (k.sigma_xz_khz) k.a_xz_khz += *k.sigma_xz_khz * xz;
  }
  return out;
}

}  // namespace nvbath
