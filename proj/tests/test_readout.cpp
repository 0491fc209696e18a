#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "nvbath/dynamics.hpp"
#include "nvbath/errors.hpp"
#include "nvbath/metrics.hpp"
#include "nvbath/readout.hpp"
#include "test_support.hpp"

using namespace nvbath;

namespace {

void check_physical(const DensityMatrix& rho) {
  CHECK(std::abs(rho.matrix().trace() - 1.0) < 1e-12);
  CHECK(hermiticity_error(rho.matrix()) < 1e-14);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho.matrix());
  CHECK(es.eigenvalues().minCoeff() > -1e-12);
}

}  // namespace

TEST_CASE("Pauli settings") {
  const auto settings = pauli_settings();
  REQUIRE(settings.size() == 16);
  CHECK(settings.front().label() == "II");
  CHECK(settings.back().label() == "ZZ");
  CHECK(PauliSetting::parse("XY") == PauliSetting{'X', 'Y'});
  CHECK_THROWS_AS(PauliSetting::parse("XQ"), InvalidInput);
  CHECK_THROWS_AS(PauliSetting::parse("X"), InvalidInput);
  // Bell state parities: XX = +1, YY = -1, ZZ = +1.
  CHECK(setting_probability(bell_state(), {'X', 'X'}) == doctest::Approx(1.0));
  CHECK(setting_probability(bell_state(), {'Y', 'Y'}) == doctest::Approx(0.0));
  CHECK(setting_probability(bell_state(), {'Z', 'Z'}) == doctest::Approx(1.0));
  CHECK(setting_probability(bell_state(), {'Z', 'I'}) == doctest::Approx(0.5));
}

TEST_CASE("readout probability") {
  CountsRecord rec{"ZZ", 100, 30.0, 30.0, 20.0};
  CHECK(readout_probability(rec) == 1.0);
  rec.c_signal = 20.0;
  CHECK(readout_probability(rec) == 0.0);
  rec.c_signal = 25.0;
  CHECK(readout_probability(rec) == 0.5);
  rec.c_signal = 35.0;
  CHECK(readout_probability(rec) == 1.5);  // not clipped
  rec.c_bright = 20.0;
  CHECK_THROWS_AS(readout_probability(rec), InvalidInput);
  CountsRecord zero_shots{"ZZ", 0, 1.0, 2.0, 1.0};
  CHECK_THROWS_AS(zero_shots.validate(), InvalidInput);
  CHECK_THROWS_AS((ReadoutCalibration{0.01, 0.02}.validate()), InvalidInput);
}

TEST_CASE("exact counts reproduce the quantum probabilities") {
  std::mt19937_64 rng(1);
  const DensityMatrix rho(nvbath::testing::random_state(rng, 4));
  const auto settings = pauli_settings();
  const auto recs = simulate_counts(rho, settings, 1000, ReadoutCalibration{}, 0, CountMode::Exact);
  for (std::size_t i = 0; i < settings.size(); ++i) {
    CHECK(std::abs(readout_probability(recs[i]) - setting_probability(rho, settings[i])) < 1e-12);
  }
}

TEST_CASE("Poisson counts are seeded and statistically consistent") {
  const ReadoutCalibration cal;
  const auto settings = pauli_settings();
  const auto a = simulate_counts(bell_state(), settings, 1000000, cal, 7);
  const auto b = simulate_counts(bell_state(), settings, 1000000, cal, 7);
  CHECK(a == b);
  CHECK(!(a == simulate_counts(bell_state(), settings, 1000000, cal, 8)));

  // A subset of settings draws the same counts as the full list.
  const std::vector<PauliSetting> two{settings[5], settings[15]};
  const auto sub = simulate_counts(bell_state(), two, 1000000, cal, 7);
  CHECK(sub[0] == a[5]);
  CHECK(sub[1] == a[15]);

  const double shots = 1e6;
  const double contrast = cal.rate_bright - cal.rate_dark;
  int outside = 0;
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const double p = setting_probability(bell_state(), settings[i]);
    const double var = (shots * (cal.rate_dark + p * contrast) + (1 - p) * (1 - p) * shots * cal.rate_dark +
                        p * p * shots * cal.rate_bright) /
                       std::pow(shots * contrast, 2);
    if (std::abs(readout_probability(a[i]) - p) > 3.0 * std::sqrt(var)) ++outside;
  }
  CHECK(outside == 0);
}

TEST_CASE("linear inversion") {
  const auto recs = simulate_counts(dephased_bell_state(0.6, 0.3), pauli_settings(), 1000, ReadoutCalibration{}, 0,
                                    CountMode::Exact);
  const auto rho = linear_inversion(recs);
  CHECK(trace_distance(rho, dephased_bell_state(0.6, 0.3)) < 1e-10);
  const std::vector<CountsRecord> partial(recs.begin(), recs.begin() + 10);
  CHECK_THROWS_AS(linear_inversion(partial), InvalidInput);
}

TEST_CASE("likelihood reconstruction from exact counts") {
  const ReadoutCalibration cal;
  const auto bell = simulate_counts(bell_state(), pauli_settings(), 1000000, cal, 0, CountMode::Exact);
  const auto r = mle_reconstruct(bell, cal);
  CHECK(fidelity(r.rho, bell_state()) >= 1.0 - 1e-6);
  check_physical(r.rho);

  const auto truth = dephased_bell_state(0.6, 0.0);
  const auto d = mle_reconstruct(simulate_counts(truth, pauli_settings(), 1000000, cal, 0, CountMode::Exact), cal);
  CHECK(std::abs(concurrence(d.rho) - 0.6) < 1e-6);
  check_physical(d.rho);
}

TEST_CASE("likelihood reconstruction from noisy counts") {
  const ReadoutCalibration sharp{1.0, 0.0};
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto mixed = DensityMatrix::maximally_mixed(4);
    const auto r = mle_reconstruct(simulate_counts(mixed, pauli_settings(), 1000000, sharp, seed), sharp);
    CHECK(trace_distance(r.rho, mixed) < 0.01);
    check_physical(r.rho);
    const auto truth = dephased_bell_state(0.6, 0.0);
    const auto d = mle_reconstruct(simulate_counts(truth, pauli_settings(), 1000000, sharp, seed), sharp);
    CHECK(std::abs(concurrence(d.rho) - 0.6) < 0.01);
    CHECK(fidelity(d.rho, truth) >= 0.99);
  }
  // Default photon rates: the state stays physical whatever the noise.
  const ReadoutCalibration cal;
  const auto noisy = mle_reconstruct(simulate_counts(bell_state(), pauli_settings(), 1000000, cal, 3), cal);
  check_physical(noisy.rho);
  CHECK(fidelity(noisy.rho, bell_state()) > 0.9);
}

TEST_CASE("non-convergence carries the best iterate") {
  const ReadoutCalibration cal;
  const auto recs = simulate_counts(dephased_bell_state(0.6, 0.0), pauli_settings(), 1000000, cal, 2);
  MleOptions tight;
  tight.max_iterations = 1;
  tight.gradient_tolerance = 0.0;
  try {
    (void)mle_reconstruct(recs, cal, tight);
    FAIL("expected a convergence error");
  } catch (const MleConvergenceError& e) {
    CHECK(e.gradient_norm() > 0.0);
    check_physical(e.best());
  }
}
