#pragma once

// Entanglement and distinguishability measures on density matrices.

#include <span>
#include <vector>

#include "nvbath/density_matrix.hpp"

namespace nvbath {

/// Wootters concurrence of a two-qubit state, in [0, 1].
///
/// Spin-flipped partner rho~ = (sy x sy) rho* (sy x sy) with the conjugate
/// taken in the computational basis. Eigenvalues above -1e-9 are clamped to
/// zero; anything below -1e-6 raises NumericalFailure.
double concurrence(const DensityMatrix& rho);

/// Half the trace norm of the difference. Throws InvalidInput on dimension mismatch.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

struct TimedValue {
  double t = 0.0;
  double value = 0.0;
};

/// Sum of the positive increments of a time-ordered distinguishability trace.
/// Throws InvalidInput when t is not strictly ascending.
double blp_measure(std::span<const TimedValue> trace);

}  // namespace nvbath
