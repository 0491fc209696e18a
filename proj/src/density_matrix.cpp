#include "nvbath/density_matrix.hpp"

#include <cmath>

#include "nvbath/errors.hpp"

namespace nvbath {

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw InvalidInput("DensityMatrix: matrix must be square and non-empty");
  }
  if (!m_.allFinite()) throw InvalidInput("DensityMatrix: non-finite entries");
  if (hermiticity_error(m_) > 1e-10) throw InvalidInput("DensityMatrix: not Hermitian");
  m_ = 0.5 * (m_ + m_.adjoint()).eval();
  if (std::abs(m_.trace() - Complex(1.0)) > 1e-10) {
    throw InvalidInput("DensityMatrix: trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-9) {
    throw InvalidInput("DensityMatrix: not positive semidefinite");
  }
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
  const double norm = psi.norm();
  if (!(norm > 0.0)) throw InvalidInput("DensityMatrix::pure: zero vector");
  const ComplexVector v = psi / norm;
  return DensityMatrix(v * v.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
  return DensityMatrix(identity(dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::project(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidInput("DensityMatrix::project: matrix must be square and non-empty");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (m + m.adjoint()));
  RealVector evals = solver.eigenvalues().cwiseMax(0.0);
  const double total = evals.sum();
  if (!(total > 0.0)) return maximally_mixed(m.rows());
  evals /= total;
  const ComplexMatrix& v = solver.eigenvectors();
  return DensityMatrix(v * evals.cast<Complex>().asDiagonal() * v.adjoint());
}

DensityMatrix bell_state() {
  ComplexVector psi = ComplexVector::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  return DensityMatrix::pure(psi);
}

}  // namespace nvbath
