#pragma once

#include "nvbath/spincore.hpp"

namespace nvbath {

/// Hermitian, unit-trace, positive semidefinite matrix.
///
/// Construction validates the invariants (Hermitian and unit trace within
/// 1e-10, minimum eigenvalue above -1e-9) and stores the symmetrized matrix.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m);

  /// Normalized |psi><psi|.
  static DensityMatrix pure(const ComplexVector& psi);
  static DensityMatrix maximally_mixed(Eigen::Index dim);
  /// Clips negative eigenvalues and renormalizes; falls back to the maximally
  /// mixed state when nothing positive survives.
  static DensityMatrix project(const ComplexMatrix& m);

  [[nodiscard]] const ComplexMatrix& matrix() const { return m_; }
  [[nodiscard]] Eigen::Index dim() const { return m_.rows(); }
  [[nodiscard]] Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  ComplexMatrix m_;
};

/// (|00> + |11>) / sqrt(2) as a 4x4 state.
DensityMatrix bell_state();

}  // namespace nvbath
