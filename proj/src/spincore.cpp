#include "nvbath/spincore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nvbath/errors.hpp"

namespace nvbath {

SpinOperators spin_operators(double s) {
  if (s != 0.5 && s != 1.0) {
    throw InvalidInput("spin_operators: unsupported spin " + std::to_string(s));
  }
  const auto n = static_cast<Eigen::Index>(std::lround(2.0 * s + 1.0));
  ComplexMatrix iz = ComplexMatrix::Zero(n, n);
  ComplexMatrix raise = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double m = s - static_cast<double>(k);
    iz(k, k) = m;
    // <m+1| I+ |m> sits one row above the column of m.
    if (k > 0) raise(k - 1, k) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  const ComplexMatrix lower = raise.adjoint();
  SpinOperators ops;
  ops.s = s;
  ops.iz = iz;
  ops.ix = 0.5 * (raise + lower);
  ops.iy = Complex(0.0, -0.5) * (raise - lower);
  return ops;
}

ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix kron_all(std::span<const ComplexMatrix> factors) {
  if (factors.empty()) return identity(1);
  ComplexMatrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = kron(out, factors[k]);
  return out;
}

double max_abs(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

double hermiticity_error(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(a - a.adjoint());
}

ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t) {
  if (h.rows() != h.cols() || h.rows() == 0) {
    throw InvalidInput("expm_hermitian: matrix must be square and non-empty");
  }
  if (hermiticity_error(h) > 1e-10) {
    throw InvalidInput("expm_hermitian: matrix is not Hermitian");
  }
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("expm_hermitian: eigendecomposition failed");
  }
  const RealVector& evals = solver.eigenvalues();
  ComplexVector phases(evals.size());
  for (Eigen::Index k = 0; k < evals.size(); ++k) {
    phases(k) = std::polar(1.0, -evals(k) * t);
  }
  const ComplexMatrix& v = solver.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

ComplexMatrix partial_trace(const ComplexMatrix& rho,
                            std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep) {
  if (rho.rows() != rho.cols()) {
    throw InvalidInput("partial_trace: matrix must be square");
  }
  if (dims.empty() || keep.empty()) {
    throw InvalidInput("partial_trace: dims and keep must be non-empty");
  }
  const std::size_t total = std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                                            std::multiplies<>());
  if (total != static_cast<std::size_t>(rho.rows())) {
    throw InvalidInput("partial_trace: subsystem dimensions do not match matrix size");
  }
  const std::size_t nsub = dims.size();
  std::vector<bool> kept(nsub, false);
  for (std::size_t k : keep) {
    if (k >= nsub || kept[k]) {
      throw InvalidInput("partial_trace: keep index out of range or repeated");
    }
    kept[k] = true;
  }

  // Row-major strides of the full index and of the kept/traced sub-indices.
  std::vector<std::size_t> stride(nsub);
  std::size_t acc = 1;
  for (std::size_t k = nsub; k-- > 0;) {
    stride[k] = acc;
    acc *= dims[k];
  }
  std::size_t dim_keep = 1;
  std::size_t dim_trace = 1;
  for (std::size_t k = 0; k < nsub; ++k) (kept[k] ? dim_keep : dim_trace) *= dims[k];

  // offset_keep[a] / offset_trace[b]: contribution of sub-index a / b to the full index.
  auto offsets = [&](bool want_kept, std::size_t count) {
    std::vector<std::size_t> out(count, 0);
    for (std::size_t idx = 0; idx < count; ++idx) {
      std::size_t rem = idx;
      std::size_t off = 0;
      for (std::size_t k = nsub; k-- > 0;) {
        if (kept[k] != want_kept) continue;
        off += (rem % dims[k]) * stride[k];
        rem /= dims[k];
      }
      out[idx] = off;
    }
    return out;
  };
  const auto off_keep = offsets(true, dim_keep);
  const auto off_trace = offsets(false, dim_trace);

  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim_keep),
                                          static_cast<Eigen::Index>(dim_keep));
  for (std::size_t i = 0; i < dim_keep; ++i) {
    for (std::size_t j = 0; j < dim_keep; ++j) {
      Complex sum = 0.0;
      for (std::size_t b = 0; b < dim_trace; ++b) {
        sum += rho(static_cast<Eigen::Index>(off_keep[i] + off_trace[b]),
                   static_cast<Eigen::Index>(off_keep[j] + off_trace[b]));
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum;
    }
  }
  return out;
}

double trace_norm(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw InvalidInput("trace_norm: matrix must be square");
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues().sum();
}

ComplexMatrix matrix_power(const ComplexMatrix& a, unsigned exponent) {
  if (a.rows() != a.cols()) throw InvalidInput("matrix_power: matrix must be square");
  ComplexMatrix result = identity(a.rows());
  ComplexMatrix base = a;
  while (exponent > 0) {
    if (exponent & 1U) result = result * base;
    exponent >>= 1U;
    if (exponent > 0) base = base * base;
  }
  return result;
}

}  // namespace nvbath
