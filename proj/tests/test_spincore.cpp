#include <doctest.h>

#include <cmath>

#include "nvbath/errors.hpp"
#include "nvbath/spincore.hpp"
#include "test_support.hpp"

using namespace nvbath;
using nvbath::testing::random_hermitian;
using nvbath::testing::random_matrix;
using nvbath::testing::random_pure;
using nvbath::testing::random_state;
using nvbath::testing::random_unitary;

namespace {

// Scaled-and-squared Taylor series for exp(-i h t).
ComplexMatrix taylor_expm(const ComplexMatrix& h, double t) {
  ComplexMatrix a = Complex(0.0, -t) * h;
  int squarings = 0;
  while (a.cwiseAbs().sum() > 0.5) {
    a /= 2.0;
    ++squarings;
  }
  ComplexMatrix sum = ComplexMatrix::Identity(h.rows(), h.cols());
  ComplexMatrix term = sum;
  for (int k = 1; k < 30; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

ComplexMatrix diag(std::initializer_list<double> d) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) {
    m(i, i) = x;
    ++i;
  }
  return m;
}

}  // namespace

TEST_CASE("spin-1/2 and spin-1 operators") {
  const auto half = spin_operators(0.5);
  CHECK(max_abs(half.iz - diag({0.5, -0.5})) < 1e-15);
  CHECK(std::abs(half.ix(0, 1) - 0.5) < 1e-15);
  CHECK(std::abs(half.ix(0, 0)) < 1e-15);
  const auto one = spin_operators(1.0);
  CHECK(max_abs(one.iz - diag({1.0, 0.0, -1.0})) < 1e-15);
  CHECK_THROWS_AS(spin_operators(1.5), InvalidInput);

  for (const auto& ops : {half, one}) {
    const Complex i(0.0, 1.0);
    CHECK(hermiticity_error(ops.ix) < 1e-12);
    CHECK(hermiticity_error(ops.iy) < 1e-12);
    CHECK(max_abs(ops.ix * ops.iy - ops.iy * ops.ix - i * ops.iz) < 1e-12);
    CHECK(max_abs(ops.iy * ops.iz - ops.iz * ops.iy - i * ops.ix) < 1e-12);
    CHECK(max_abs(ops.iz * ops.ix - ops.ix * ops.iz - i * ops.iy) < 1e-12);
    const double s = ops.s;
    const ComplexMatrix casimir = ops.ix * ops.ix + ops.iy * ops.iy + ops.iz * ops.iz;
    CHECK(max_abs(casimir - s * (s + 1.0) * identity(ops.dim())) < 1e-12);

    // Raising operator: index j holds m = s - j.
    const ComplexMatrix raise = ops.ix + i * ops.iy;
    for (Eigen::Index j = 1; j < ops.dim(); ++j) {
      const double m = s - static_cast<double>(j);
      CHECK(std::abs(raise(j - 1, j) - std::sqrt(s * (s + 1.0) - m * (m + 1.0))) < 1e-12);
    }
  }
}

TEST_CASE("kron ordering and associativity") {
  CHECK(max_abs(kron(identity(2), identity(3)) - identity(6)) == 0.0);
  CHECK(max_abs(kron(diag({1.0, -1.0}), identity(2)) - diag({1.0, 1.0, -1.0, -1.0})) == 0.0);
  std::mt19937_64 rng(11);
  const auto a = random_matrix(rng, 2);
  const auto b = random_matrix(rng, 2);
  const auto c = random_matrix(rng, 2);
  CHECK(max_abs(kron(a, kron(b, c)) - kron(kron(a, b), c)) < 1e-13);
  const std::vector<ComplexMatrix> parts{a, b, c};
  CHECK(max_abs(kron_all(parts) - kron(kron(a, b), c)) < 1e-13);
}

TEST_CASE("matrix exponential") {
  CHECK(max_abs(expm_hermitian(ComplexMatrix::Zero(3, 3), 2.5) - identity(3)) < 1e-15);
  const double w = 1.3;
  const double t = 0.7;
  const ComplexMatrix u = expm_hermitian(diag({w, -w}), t);
  CHECK(std::abs(u(0, 0) - std::exp(Complex(0, -w * t))) < 1e-14);
  CHECK(std::abs(u(1, 1) - std::exp(Complex(0, w * t))) < 1e-14);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto h = random_hermitian(rng, 4);
    const auto e = expm_hermitian(h, 0.37);
    CHECK(max_abs(e - taylor_expm(h, 0.37)) < 1e-9);
    CHECK(max_abs(e.adjoint() * e - identity(4)) < 1e-10);
  }
  ComplexMatrix bad = ComplexMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(expm_hermitian(bad, 1.0), InvalidInput);
}

TEST_CASE("partial trace") {
  std::mt19937_64 rng(3);
  const auto ra = random_state(rng, 2);
  const auto rb = random_state(rng, 3);
  const std::vector<std::size_t> dims{2, 3};
  const std::vector<std::size_t> keep_a{0};
  const std::vector<std::size_t> keep_b{1};
  CHECK(max_abs(partial_trace(kron(ra, rb), dims, keep_a) - ra) < 1e-12);
  CHECK(max_abs(partial_trace(kron(ra, rb), dims, keep_b) - rb) < 1e-12);

  ComplexVector bell = ComplexVector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const std::vector<std::size_t> qubits{2, 2};
  const ComplexMatrix reduced = partial_trace(bell * bell.adjoint(), qubits, keep_a);
  CHECK(max_abs(reduced - 0.5 * identity(2)) < 1e-12);

  // Explicit index-summation oracle on a random 3-qubit pure state, keep {1, 2}.
  const auto psi = random_pure(rng, 8);
  const ComplexMatrix rho = psi * psi.adjoint();
  const std::vector<std::size_t> three{2, 2, 2};
  const std::vector<std::size_t> keep12{1, 2};
  const ComplexMatrix r12 = partial_trace(rho, three, keep12);
  ComplexMatrix oracle = ComplexMatrix::Zero(4, 4);
  for (int a = 0; a < 2; ++a) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) oracle(i, j) += rho(a * 4 + i, a * 4 + j);
    }
  }
  CHECK(max_abs(r12 - oracle) < 1e-12);
  CHECK(std::abs(r12.trace() - 1.0) < 1e-12);
  CHECK(hermiticity_error(r12) < 1e-12);

  // Tracing C then B equals tracing {B, C} at once.
  const auto big = random_state(rng, 12);
  const std::vector<std::size_t> d3{2, 3, 2};
  const std::vector<std::size_t> keep01{0, 1};
  const std::vector<std::size_t> keep0{0};
  const ComplexMatrix stepwise = partial_trace(partial_trace(big, d3, keep01), dims, keep0);
  CHECK(max_abs(stepwise - partial_trace(big, d3, keep0)) < 1e-12);

  const std::vector<std::size_t> wrong{2, 2};
  CHECK_THROWS_AS(partial_trace(big, wrong, keep0), InvalidInput);
  const std::vector<std::size_t> none;
  CHECK_THROWS_AS(partial_trace(big, d3, none), InvalidInput);
}

TEST_CASE("trace norm") {
  CHECK(trace_norm(ComplexMatrix::Zero(3, 3)) == 0.0);
  CHECK(std::abs(trace_norm(diag({1.0, -1.0})) - 2.0) < 1e-14);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_matrix(rng, 4);
    const auto b = random_matrix(rng, 4);
    const auto u = random_unitary(rng, 4);
    const auto v = random_unitary(rng, 4);
    CHECK(std::abs(trace_norm(a) - trace_norm(u * a * v)) < 1e-10);
    CHECK(trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-10);
    CHECK(std::abs(trace_norm(-2.5 * a) - 2.5 * trace_norm(a)) < 1e-10);
  }
}

TEST_CASE("matrix power by squaring") {
  std::mt19937_64 rng(2);
  const auto u = random_unitary(rng, 3);
  ComplexMatrix naive = identity(3);
  for (int k = 0; k < 13; ++k) naive = naive * u;
  CHECK(max_abs(matrix_power(u, 13) - naive) < 1e-12);
  CHECK(max_abs(matrix_power(u, 0) - identity(3)) == 0.0);
}
