#pragma once

// Dense complex linear algebra and angular-momentum operators.
//
// Frequencies are angular (rad/us) and times are in microseconds everywhere
// in the library, so a propagator is exp(-i H t) with no extra factors.
// Basis states are ordered by decreasing magnetic quantum number.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace nvbath {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Angular frequency in rad/us from a frequency in kHz.
constexpr double khz_to_angular(double khz) { return kTwoPi * khz * 1e-3; }
/// Angular frequency in rad/us from a frequency in MHz.
constexpr double mhz_to_angular(double mhz) { return kTwoPi * mhz; }
/// Angular frequency in rad/us from a frequency in GHz.
constexpr double ghz_to_angular(double ghz) { return kTwoPi * ghz * 1e3; }

struct SpinOperators {
  double s = 0.5;
  ComplexMatrix ix;
  ComplexMatrix iy;
  ComplexMatrix iz;

  [[nodiscard]] Eigen::Index dim() const { return iz.rows(); }
};

/// Angular momentum matrices for spin 1/2 or 1. Throws InvalidInput for any other s.
SpinOperators spin_operators(double s);

ComplexMatrix identity(Eigen::Index n);

/// Kronecker product; the index of `a` varies slowest.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Kronecker product of a list of factors, first factor slowest.
ComplexMatrix kron_all(std::span<const ComplexMatrix> factors);

/// Largest absolute entry of a - a^dagger.
double hermiticity_error(const ComplexMatrix& a);

double max_abs(const ComplexMatrix& a);

/// exp(-i h t) for Hermitian h via eigendecomposition.
///
/// Rejects h whose deviation from its adjoint exceeds 1e-10 (absolute, max
/// entry). The input is symmetrized before diagonalization.
ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t);

/// Reduced matrix over the subsystems listed in `keep`.
///
/// `dims` lists subsystem dimensions, slowest first, and must multiply to
/// the matrix size. `keep` may be in any order; the kept subsystems appear in
/// the result in ascending index order.
ComplexMatrix partial_trace(const ComplexMatrix& rho,
                            std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep);

/// Sum of singular values.
double trace_norm(const ComplexMatrix& a);

/// Integer power of a square matrix by repeated squaring.
ComplexMatrix matrix_power(const ComplexMatrix& a, unsigned exponent);

}  // namespace nvbath
