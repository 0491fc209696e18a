#include "nvbath/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "nvbath/errors.hpp"
#include "nvbath/metrics.hpp"

namespace nvbath {
namespace {

const Matrix2c kSigmaX = (Matrix2c() << 0, 1, 1, 0).finished();
const Matrix2c kSigmaZ = (Matrix2c() << 1, 0, 0, -1).finished();

// Free-evolution intervals of a sequence; an ideal pi pulse sits between
// consecutive intervals.
std::vector<double> intervals(const PulseSequence& seq) {
  return std::visit(
      [](const auto& s) -> std::vector<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FreeEvolution>) {
          return {s.t};
        } else if constexpr (std::is_same_v<T, HahnEcho>) {
          return {s.tau, s.tau};
        } else if constexpr (std::is_same_v<T, Cpmg>) {
          std::vector<double> out{s.tau};
          for (int k = 1; k < s.n; ++k) out.push_back(2.0 * s.tau);
          out.push_back(s.tau);
          return out;
        } else {
          return {s.tau1, 2.0 * s.tau1, s.tau1};
        }
      },
      seq);
}

// Carbon propagator for the branch that starts at electron level `start_ms`.
Matrix2c branch_propagator(const ConditionalField& f0, const ConditionalField& f1,
                           std::span<const double> durations, int start_ms) {
  Matrix2c u = Matrix2c::Identity();
  bool in_zero = start_ms == 0;
  for (double d : durations) {
    const auto& f = in_zero ? f0 : f1;
    u = spin_half_propagator(f.z, f.x, d) * u;
    in_zero = !in_zero;
  }
  return u;
}

Matrix2c power2(Matrix2c base, unsigned exponent) {
  Matrix2c result = Matrix2c::Identity();
  while (exponent > 0) {
    if (exponent & 1U) result = result * base;
    exponent >>= 1U;
    if (exponent > 0) base = base * base;
  }
  return result;
}

void check_even(int n, const char* who) {
  if (n < 0 || n % 2 != 0) {
    throw InvalidInput(std::string(who) + ": pulse count must be even and nonnegative");
  }
}

void check_tau(double tau, const char* who) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw InvalidInput(std::string(who) + ": tau must be positive");
  }
}

// sin(r)/r and (cos(r) - sin(r)/r)/r^2 with their small-r limits.
double sinc(double r) { return r < 1e-4 ? 1.0 - r * r / 6.0 : std::sin(r) / r; }
double sinc_slope(double r) {
  return r < 1e-3 ? -1.0 / 3.0 + r * r / 30.0 : (std::cos(r) - std::sin(r) / r) / (r * r);
}

// Propagator exp(-i (a_x sx + a_z sz)) and its derivatives with respect to a_z and a_x.
struct PropagatorDerivative {
  Matrix2c u;
  Matrix2c du_daz;
  Matrix2c du_dax;
};
PropagatorDerivative propagator_with_derivative(double az, double ax) {
  const double r = std::hypot(az, ax);
  const double f = sinc(r);
  const double g = sinc_slope(r);
  const Complex mi(0.0, -1.0);
  const Matrix2c a_sigma = az * kSigmaZ + ax * kSigmaX;
  PropagatorDerivative out;
  out.u = std::cos(r) * Matrix2c::Identity() + mi * f * a_sigma;
  out.du_daz = -f * az * Matrix2c::Identity() + mi * (g * az * a_sigma + f * kSigmaZ);
  out.du_dax = -f * ax * Matrix2c::Identity() + mi * (g * ax * a_sigma + f * kSigmaX);
  return out;
}

// Derivative of v^m given v and dv.
Matrix2c power_derivative(const Matrix2c& v, const Matrix2c& dv, unsigned m) {
  Matrix2c p = Matrix2c::Identity();
  Matrix2c d = Matrix2c::Zero();
  for (unsigned k = 0; k < m; ++k) {
    d = d * v + p * dv;
    p = p * v;
  }
  return d;
}

}  // namespace

void validate(const PulseSequence& seq) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FreeEvolution>) {
          if (!(s.t >= 0.0)) throw InvalidInput("free evolution: t must be nonnegative");
        } else if constexpr (std::is_same_v<T, HahnEcho>) {
          check_tau(s.tau, "hahn");
        } else if constexpr (std::is_same_v<T, Cpmg>) {
          check_tau(s.tau, "cpmg");
          if (s.n < 1) throw InvalidInput("cpmg: pulse count must be at least 1");
        } else {
          check_tau(s.tau1, "prep");
        }
      },
      seq);
}

double total_time(const PulseSequence& seq) {
  const auto d = intervals(seq);
  double t = 0.0;
  for (double x : d) t += x;
  return t;
}

Matrix2c spin_half_propagator(double z, double x, double t) {
  // z I_z + x I_x = (z sz + x sx) / 2
  return propagator_with_derivative(0.5 * z * t, 0.5 * x * t).u;
}

CpmgUnit cpmg_unit_propagators(const CarbonParams& k, const PhysicalConstants& c, double tau) {
  check_tau(tau, "cpmg_unit_propagators");
  const auto f0 = conditional_field(k, c, 0);
  const auto f1 = conditional_field(k, c, -1);
  const Matrix2c a0 = spin_half_propagator(f0.z, f0.x, tau);
  const Matrix2c b1 = spin_half_propagator(f1.z, f1.x, 2.0 * tau);
  const Matrix2c a1 = spin_half_propagator(f1.z, f1.x, tau);
  const Matrix2c b0 = spin_half_propagator(f0.z, f0.x, 2.0 * tau);
  return {a0 * b1 * a0, a1 * b0 * a1};
}

double carbon_coherence_factor(const CarbonParams& k, const PhysicalConstants& c, double tau,
                               int n) {
  check_even(n, "carbon_coherence_factor");
  if (n == 0) return 1.0;
  const auto unit = cpmg_unit_propagators(k, c, tau);
  const auto m = static_cast<unsigned>(n / 2);
  const Matrix2c u0 = power2(unit.v0, m);
  const Matrix2c u1 = power2(unit.v1, m);
  return std::clamp(0.5 * (u0 * u1.adjoint()).trace().real(), -1.0, 1.0);
}

FactorGradient carbon_coherence_gradient(const CarbonParams& k, const PhysicalConstants& c,
                                         double tau, int n) {
  check_even(n, "carbon_coherence_gradient");
  check_tau(tau, "carbon_coherence_gradient");
  if (n == 0) return {};
  const auto f0 = conditional_field(k, c, 0);
  const auto f1 = conditional_field(k, c, -1);
  // Only the m_s = -1 field depends on the couplings:
  // z1 = w_L - 2 pi A_zz, x1 = -2 pi A_xz (angular units, A in kHz).
  const double dfield = -khz_to_angular(1.0);

  const Matrix2c a0 = spin_half_propagator(f0.z, f0.x, tau);
  const Matrix2c b0 = spin_half_propagator(f0.z, f0.x, 2.0 * tau);
  const auto b1 = propagator_with_derivative(f1.z * tau, f1.x * tau);         // 2 tau
  const auto a1 = propagator_with_derivative(0.5 * f1.z * tau, 0.5 * f1.x * tau);  // tau

  const Matrix2c v0 = a0 * b1.u * a0;
  const Matrix2c v1 = a1.u * b0 * a1.u;
  // d(a_z)/d(A_zz) = dfield * (duration / 2); same pattern for x.
  const Matrix2c dv0_zz = a0 * b1.du_daz * a0 * (dfield * tau);
  const Matrix2c dv0_xz = a0 * b1.du_dax * a0 * (dfield * tau);
  const double s = dfield * 0.5 * tau;
  const Matrix2c dv1_zz = (a1.du_daz * b0 * a1.u + a1.u * b0 * a1.du_daz) * s;
  const Matrix2c dv1_xz = (a1.du_dax * b0 * a1.u + a1.u * b0 * a1.du_dax) * s;

  const auto m = static_cast<unsigned>(n / 2);
  const Matrix2c u0 = power2(v0, m);
  const Matrix2c u1 = power2(v1, m);
  auto d_overlap = [&](const Matrix2c& dv0, const Matrix2c& dv1) {
    const Matrix2c du0 = power_derivative(v0, dv0, m);
    const Matrix2c du1 = power_derivative(v1, dv1, m);
    return 0.5 * (du0 * u1.adjoint() + u0 * du1.adjoint()).trace().real();
  };
  FactorGradient out;
  out.value = 0.5 * (u0 * u1.adjoint()).trace().real();
  out.d_azz = d_overlap(dv0_zz, dv1_zz);
  out.d_axz = d_overlap(dv0_xz, dv1_xz);
  return out;
}

BathCoherence bath_coherence(std::span<const CarbonParams> carbons, const PhysicalConstants& c,
                             double tau, int n) {
  check_even(n, "bath_coherence");
  check_tau(tau, "bath_coherence");
  double w = 1.0;
  for (const auto& k : carbons) w *= carbon_coherence_factor(k, c, tau, n);
  return {w, 0.5 * (w + 1.0)};
}

double sequence_coherence(std::span<const CarbonParams> carbons, const PhysicalConstants& c,
                          const PulseSequence& seq) {
  validate(seq);
  const auto d = intervals(seq);
  double w = 1.0;
  for (const auto& k : carbons) {
    const auto f0 = conditional_field(k, c, 0);
    const auto f1 = conditional_field(k, c, -1);
    const Matrix2c u0 = branch_propagator(f0, f1, d, 0);
    const Matrix2c u1 = branch_propagator(f0, f1, d, -1);
    w *= std::clamp(0.5 * (u0 * u1.adjoint()).trace().real(), -1.0, 1.0);
  }
  return w;
}

double pair_phase(const PhysicalConstants& c, const PulseSequence& seq) {
  validate(seq);
  // Only |m_s=-1, m_I=+1> carries energy, E = -A_par. The |00> component
  // occupies it during the odd-numbered intervals.
  const auto d = intervals(seq);
  double time_flipped = 0.0;
  for (std::size_t i = 1; i < d.size(); i += 2) time_flipped += d[i];
  return mhz_to_angular(c.a_par_mhz) * time_flipped;
}

DensityMatrix dephased_bell_state(double w, double phi) {
  if (!(std::abs(w) <= 1.0)) throw InvalidInput("dephased_bell_state: |w| must not exceed 1");
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = 0.5;
  m(3, 3) = 0.5;
  m(0, 3) = 0.5 * w * std::polar(1.0, phi);
  m(3, 0) = std::conj(m(0, 3));
  return DensityMatrix(m);
}

CoherenceTrace coherence_scan(std::span<const CarbonParams> carbons, const PhysicalConstants& c,
                              std::span<const double> taus, int n, unsigned threads) {
  check_even(n, "coherence_scan");
  CoherenceTrace trace;
  trace.n = n;
  trace.x.assign(taus.begin(), taus.end());
  trace.w.assign(taus.size(), 0.0);
  for (const auto& k : carbons) trace.carbons.push_back(k.label);

  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < taus.size(); i += stride) {
      trace.w[i] = bath_coherence(carbons, c, taus[i], n).w;
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, taus.size()));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work, t, workers);
  }
  return trace;
}

EntanglementTrace entanglement_trace(std::span<const CarbonParams> carbons,
                                     const PhysicalConstants& c, double tau,
                                     std::span<const int> n_values,
                                     const EntanglementOptions& options) {
  check_tau(tau, "entanglement_trace");
  EntanglementTrace out;
  out.tau = tau;
  int previous = -1;
  for (int n : n_values) {
    check_even(n, "entanglement_trace");
    if (n <= previous) throw InvalidInput("entanglement_trace: pulse counts must ascend");
    previous = n;

    double w = 0.0;
    double phi = 0.0;
    if (options.prep_tau1) {
      // Preparation echo followed by the CPMG train, composed per carbon.
      std::vector<double> d{*options.prep_tau1, 2.0 * *options.prep_tau1, *options.prep_tau1};
      const auto train = intervals(Cpmg{tau, n});
      if (n > 0) d.insert(d.end(), train.begin(), train.end());
      w = 1.0;
      for (const auto& k : carbons) {
        const auto f0 = conditional_field(k, c, 0);
        const auto f1 = conditional_field(k, c, -1);
        const Matrix2c u0 = branch_propagator(f0, f1, d, 0);
        const Matrix2c u1 = branch_propagator(f0, f1, d, -1);
        w *= std::clamp(0.5 * (u0 * u1.adjoint()).trace().real(), -1.0, 1.0);
      }
    } else {
      w = bath_coherence(carbons, c, tau, n).w;
      if (n > 0) phi = pair_phase(c, Cpmg{tau, n});
    }
    out.n.push_back(n);
    out.t.push_back(2.0 * n * tau);
    out.w.push_back(w);
    out.c.push_back(concurrence(dephased_bell_state(w, phi)));
  }
  return out;
}

DensityMatrix full_oracle_propagate(const SystemConfig& cfg, const PulseSequence& seq,
                                    const DensityMatrix& initial) {
  cfg.validate();
  validate(seq);
  if (initial.dim() != 4) throw InvalidInput("full_oracle_propagate: initial state must be 4x4");

  const auto de = static_cast<Eigen::Index>(cfg.electron_levels);
  const auto dn = static_cast<Eigen::Index>(cfg.nitrogen_levels);
  const std::size_t nc = cfg.carbons.size();
  const Eigen::Index dc = Eigen::Index{1} << nc;
  const Eigen::Index pair_dim = de * dn;

  // Qubit -> level index: electron {0, -1} sit at the bottom of a spin-1
  // ladder ordered +1, 0, -1; nitrogen {+1, 0} sit at the top.
  const Eigen::Index e_offset = de == 3 ? 1 : 0;
  auto pair_index = [&](Eigen::Index q) { return (q / 2 + e_offset) * dn + (q % 2); };

  ComplexMatrix pair = ComplexMatrix::Zero(pair_dim, pair_dim);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) pair(pair_index(i), pair_index(j)) = initial(i, j);
  }
  const ComplexMatrix rho0 = kron(pair, identity(dc) / static_cast<double>(dc));

  const ComplexMatrix h = build_full_hamiltonian(cfg, Frame::Rotating);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("full_oracle_propagate: eigendecomposition failed");
  }
  const ComplexMatrix& vecs = solver.eigenvectors();
  const RealVector& evals = solver.eigenvalues();
  auto propagator = [&](double t) {
    ComplexVector phases(evals.size());
    for (Eigen::Index k = 0; k < evals.size(); ++k) phases(k) = std::polar(1.0, -evals(k) * t);
    return ComplexMatrix(vecs * phases.asDiagonal() * vecs.adjoint());
  };

  ComplexMatrix flip_e = identity(de);
  flip_e(e_offset, e_offset) = 0.0;
  flip_e(e_offset + 1, e_offset + 1) = 0.0;
  flip_e(e_offset, e_offset + 1) = 1.0;
  flip_e(e_offset + 1, e_offset) = 1.0;
  const ComplexMatrix pulse = kron(flip_e, identity(dn * dc));

  const auto d = intervals(seq);
  ComplexMatrix u = propagator(d.front());
  if (d.size() > 1) {
    // Interior intervals of a CPMG train all have the same length; reuse the
    // (pulse, free) block by repeated squaring.
    const std::size_t interior = d.size() - 2;
    if (interior > 0) {
      const ComplexMatrix block = propagator(d[1]) * pulse;
      u = matrix_power(block, static_cast<unsigned>(interior)) * u;
    }
    u = propagator(d.back()) * pulse * u;
  }
  const ComplexMatrix rho = u * rho0 * u.adjoint();

  std::vector<std::size_t> dims{static_cast<std::size_t>(de), static_cast<std::size_t>(dn)};
  dims.insert(dims.end(), nc, 2);
  const std::vector<std::size_t> keep{0, 1};
  const ComplexMatrix reduced = partial_trace(rho, dims, keep);

  ComplexMatrix out(4, 4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) out(i, j) = reduced(pair_index(i), pair_index(j));
  }
  return DensityMatrix(out);
}

double oracle_coherence(const SystemConfig& cfg, const PulseSequence& seq) {
  const auto rho = full_oracle_propagate(cfg, seq, bell_state());
  const bool odd = intervals(seq).size() % 2 == 0;  // odd number of pulses
  // An odd number of flips moves the Bell coherence to <10|rho|01>.
  const Complex element = odd ? rho(2, 1) : rho(0, 3);
  return (2.0 * element * std::polar(1.0, -pair_phase(cfg.constants, seq))).real();
}

double quasi_static_coherence(double sigma, double t) {
  if (!(sigma >= 0.0) || !(t >= 0.0)) {
    throw InvalidInput("quasi_static_coherence: sigma and t must be nonnegative");
  }
  return std::exp(-0.5 * sigma * sigma * t * t);
}

double sigma_for_coherence_time(double t_c) {
  if (!(t_c > 0.0)) throw InvalidInput("sigma_for_coherence_time: t_c must be positive");
  return std::sqrt(2.0) / t_c;
}

std::vector<double> linear_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw InvalidInput("linear_grid: need step > 0 and hi >= lo");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + static_cast<double>(i) * step;
  return out;
}

std::vector<int> even_counts(int n_min, int n_max) {
  if (n_min % 2 != 0 || n_min < 0 || n_max < n_min) {
    throw InvalidInput("even_counts: need even n_min >= 0 and n_max >= n_min");
  }
  std::vector<int> out;
  for (int n = n_min; n <= n_max; n += 2) out.push_back(n);
  return out;
}

}  // namespace nvbath
