#include "nvbath/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "nvbath/errors.hpp"

namespace nvbath {
namespace {

// Hermitian square root of a PSD matrix, small negative eigenvalues clipped.
ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  const RealVector roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const ComplexMatrix& v = solver.eigenvectors();
  return v * roots.cast<Complex>().asDiagonal() * v.adjoint();
}

}  // namespace

double concurrence(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw InvalidInput("concurrence: expects a 4x4 two-qubit state");
  ComplexMatrix syy = ComplexMatrix::Zero(4, 4);
  // sigma_y (x) sigma_y is real and anti-diagonal: -1 on |00><11| and |11><00|, +1 on the middle.
  syy(0, 3) = -1.0;
  syy(1, 2) = 1.0;
  syy(2, 1) = 1.0;
  syy(3, 0) = -1.0;
  // rho = B B^dagger over the retained eigenvectors. The square roots of the
  // eigenvalues of rho * flipped(rho) are the singular values of B^T syy B,
  // so no square root of a roundoff-level eigenvalue is ever taken.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(rho.matrix());
  const RealVector& p = eig.eigenvalues();
  if (p.minCoeff() < -1e-6) throw NumericalFailure("concurrence: negative eigenvalue, state is invalid");
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < 4; ++i) {
    if (p(i) > 1e-14) kept.push_back(i);
  }
  ComplexMatrix b(4, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    b.col(static_cast<Eigen::Index>(j)) = eig.eigenvectors().col(kept[j]) * std::sqrt(p(kept[j]));
  }
  const ComplexMatrix tau = b.transpose() * syy * b;
  Eigen::JacobiSVD<ComplexMatrix> svd(tau);
  std::vector<double> root_lambda(4, 0.0);
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    root_lambda[static_cast<std::size_t>(i)] = svd.singularValues()(i);
  }
  std::sort(root_lambda.begin(), root_lambda.end(), std::greater<>());
  const double gamma = root_lambda[0] - root_lambda[1] - root_lambda[2] - root_lambda[3];
  return std::clamp(gamma, 0.0, 1.0);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw InvalidInput("trace_distance: dimension mismatch");
  return std::clamp(0.5 * trace_norm(a.matrix() - b.matrix()), 0.0, 1.0);
}

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw InvalidInput("fidelity: dimension mismatch");
  const ComplexMatrix root = psd_sqrt(a.matrix());
  const ComplexMatrix inner = root * b.matrix() * root;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (inner + inner.adjoint()),
                                                      Eigen::EigenvaluesOnly);
  const double s = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(s * s, 0.0, 1.0);
}

double blp_measure(std::span<const TimedValue> trace) {
  double total = 0.0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (!(trace[i].t > trace[i - 1].t)) {
      throw InvalidInput("blp_measure: times must be strictly ascending");
    }
    total += std::max(0.0, trace[i].value - trace[i - 1].value);
  }
  return total;
}

}  // namespace nvbath
