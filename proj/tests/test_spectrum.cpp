#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nvbath/dynamics.hpp"
#include "nvbath/errors.hpp"
#include "nvbath/spectrum.hpp"

using namespace nvbath;
constexpr double kPi = std::numbers::pi;

namespace {

// Eq. (2) exactly as printed, without any singularity handling.
double filter_raw(double x, int n) {
  const double nn = n;
  const double s = std::sin(x / 2.0);
  const double q = std::sin(x / (4.0 * nn));
  const double c = std::cos(x / (2.0 * nn));
  return 8.0 * s * s * std::pow(q, 4) / (c * c);
}

NoiseSpectrum sampled(double lo, double hi, double step, const std::function<double(double)>& f) {
  NoiseSpectrum s;
  for (double w : linear_grid(lo, hi, step)) {
    s.omega.push_back(w);
    s.s.push_back(f(w));
  }
  return s;
}

// Composite Simpson on a uniform fine grid, nudging off the removable
// singularities of the raw formula.
double chi_simpson(const NoiseSpectrum& spec, double t, int n, double h) {
  const double lo = spec.omega.front();
  const double hi = spec.omega.back();
  const auto m = static_cast<long>(std::ceil((hi - lo) / h / 2.0)) * 2;
  const double step = (hi - lo) / static_cast<double>(m);
  auto g = [&](double w) {
    if (w <= 0.0) return 0.0;
    double x = w * t;
    if (std::abs(std::cos(x / (2.0 * n))) < 1e-7) x += 1e-6;
    return spec.at(w) / (w * w) * filter_raw(x, n);
  };
  double sum = g(lo) + g(hi);
  for (long i = 1; i < m; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * g(lo + static_cast<double>(i) * step);
  return sum * step / 3.0 / kPi;
}

}  // namespace

TEST_CASE("filter function values") {
  CHECK(filter_function(0.0, 16) == 0.0);
  CHECK(std::abs(filter_function(16 * kPi, 16) - 512.0) < 1e-6);
  CHECK(std::abs(filter_raw(16 * kPi + 1e-4, 16) - 512.0) < 1e-2);
  CHECK(std::abs(filter_raw(16 * kPi - 1e-4, 16) - 512.0) < 1e-2);
  CHECK(std::abs(filter_function(16 * kPi + 1e-4, 16) - filter_raw(16 * kPi + 1e-4, 16)) < 1e-6);
  CHECK(std::abs(filter_function(8 * kPi, 16)) < 1e-12);
  for (int n : {2, 4, 32}) {
    for (int odd : {1, 3, 5}) {
      const double limit = 2.0 * n * n * 4.0 * std::pow(std::sin(odd * kPi / 4.0), 4);
      CHECK(filter_function(n * odd * kPi, n) == doctest::Approx(limit).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(filter_function(1.0, 3), InvalidInput);
  CHECK_THROWS_AS(filter_function(1.0, 0), InvalidInput);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(0.0, 2000.0);
  std::uniform_int_distribution<int> half(1, 32);
  int negatives = 0;
  for (int i = 0; i < 1000000; ++i) {
    if (filter_function(x(rng), 2 * half(rng)) < -1e-12) ++negatives;
  }
  CHECK(negatives == 0);

  // Agreement with the raw formula away from singular points.
  for (int i = 0; i < 1000; ++i) {
    const double v = x(rng);
    const int n = 2 * half(rng);
    if (std::abs(std::cos(v / (2.0 * n))) > 1e-3) {
      CHECK(std::abs(filter_function(v, n) - filter_raw(v, n)) < 1e-9 * std::max(1.0, filter_raw(v, n)));
    }
  }
  const auto eval = evaluate_filter(std::vector<double>{0.0, 16 * kPi}, 16);
  CHECK(eval.f.size() == 2);
  CHECK(eval.n == 16);
}

TEST_CASE("filter function vanishes as the sixth power at the origin") {
  for (int n : {2, 16, 64}) {
    const double x1 = 1e-3;
    const double x2 = 1e-2;
    const double slope = std::log(filter_function(x2, n) / filter_function(x1, n)) / std::log(x2 / x1);
    CHECK(std::abs(slope - 6.0) < 0.1);
  }
}

TEST_CASE("chi for zero and white spectra") {
  const auto zero = sampled(0.0, 100.0, 0.5, [](double) { return 0.0; });
  const auto z = chi_from_spectrum(zero, 10.0, 16);
  CHECK(z.chi == 0.0);
  CHECK(z.w == 1.0);
  CHECK(z.p0 == 1.0);

  const double s0 = 0.01;
  for (int n : {32, 64}) {
    const double tau = 0.5;
    const double t = 2.0 * n * tau;
    const double w0 = kPi / (2.0 * tau);
    const auto white = sampled(0.0, 60.0 * w0, 0.05, [&](double) { return s0; });
    const double chi = chi_from_spectrum(white, t, n).chi;
    CHECK(std::abs(chi / (s0 * t / 2.0) - 1.0) < 0.02);
  }
}

TEST_CASE("smooth line sampled by the first filter lobe") {
  const int n = 256;
  const double tau = 0.25;
  const double t = 2.0 * n * tau;
  const double w0 = kPi / (2.0 * tau);
  const double area = 1e-3;
  const double sigma = 0.5;
  auto line = [&](double w) {
    return area * std::exp(-0.5 * std::pow((w - w0) / sigma, 2)) / (sigma * std::sqrt(2.0 * kPi));
  };
  const auto spec = sampled(0.0, 6.0 * w0, 0.005, line);
  const double chi = chi_from_spectrum(spec, t, n).chi;
  // The first filter lobe acts as the delta: chi -> 4 t S(w0) / pi^2.
  CHECK(std::abs(chi / (line(w0) * 4.0 * t / (kPi * kPi)) - 1.0) < 0.03);
  CHECK(std::abs(chi - chi_simpson(spec, t, n, 1e-4)) < 1e-6 * chi);
}

TEST_CASE("adaptive quadrature against a fine Simpson rule") {
  const double tau = 0.5;
  const int n = 16;
  const double t = 2.0 * n * tau;
  auto bump = [](double w) { return 0.02 * std::exp(-0.5 * std::pow((w - 3.0) / 0.6, 2)) + 0.002; };
  const auto spec = sampled(0.0, 20.0, 0.05, bump);
  const double adaptive = chi_from_spectrum(spec, t, n).chi;
  const double simpson = chi_simpson(spec, t, n, 2e-4);
  CHECK(std::abs(adaptive - simpson) < 1e-6);
}

TEST_CASE("chi is monotone in the spectrum") {
  const double tau = 0.4;
  const int n = 32;
  const double t = 2.0 * n * tau;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 0.01);
  NoiseSpectrum lo = sampled(0.0, 25.0, 0.1, [&](double) { return u(rng); });
  NoiseSpectrum hi = lo;
  for (auto& v : hi.s) v += u(rng);
  CHECK(chi_from_spectrum(hi, t, n).w <= chi_from_spectrum(lo, t, n).w);
}

TEST_CASE("coverage and input checks") {
  const auto narrow = sampled(0.0, 5.0, 0.1, [](double) { return 0.01; });
  CHECK_THROWS_AS(chi_from_spectrum(narrow, 16.0, 16), CoverageError);  // 5 w0 = 15.7
  const auto late = sampled(4.0, 40.0, 0.1, [](double) { return 0.01; });
  CHECK_THROWS_AS(chi_from_spectrum(late, 16.0, 16), CoverageError);  // w0 = 3.14
  NoiseSpectrum bad;
  bad.omega = {0.0, 1.0};
  bad.s = {0.0, -1.0};
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("reconstruction basics") {
  CoherenceTrace flat;
  flat.n = 16;
  flat.x = {0.3, 0.4, 0.5};
  flat.w = {1.0, 1.0, 1.0};
  const std::vector<CoherenceTrace> one{flat};
  const auto rec = reconstruct_spectrum(one);
  REQUIRE(rec.spectrum.s.size() == 3);
  for (double s : rec.spectrum.s) CHECK(s == 0.0);
  CHECK(rec.spectrum.omega.front() < rec.spectrum.omega.back());

  CoherenceTrace holes = flat;
  holes.w = {0.5, 0.0, -0.2};
  const std::vector<CoherenceTrace> two{holes};
  const auto r2 = reconstruct_spectrum(two);
  CHECK(r2.spectrum.s.size() == 1);
  CHECK(r2.skipped.size() == 2);
  const double t = 2.0 * 16 * 0.3;
  CHECK(r2.spectrum.s[0] == doctest::Approx(kPi * kPi * std::log(2.0) / (4.0 * t)));
}

TEST_CASE("Gaussian spectrum round trip") {
  const int n = 32;
  const double peak = kPi;
  auto line = [&](double w) { return 0.05 * std::exp(-0.5 * std::pow((w - peak) / 0.8, 2)); };
  const auto spec = sampled(0.0, 40.0, 0.01, line);
  CoherenceTrace trace;
  trace.n = n;
  const double step = 0.01;
  for (double tau : linear_grid(0.3, 1.0, step)) {
    trace.x.push_back(tau);
    trace.w.push_back(chi_from_spectrum(spec, 2.0 * n * tau, n).w);
  }
  const std::vector<CoherenceTrace> traces{trace};
  const auto rec = reconstruct_spectrum(traces);
  const auto& s = rec.spectrum;
  const auto it = std::max_element(s.s.begin(), s.s.end());
  const double w_peak = s.omega[static_cast<std::size_t>(it - s.s.begin())];
  const double tau_peak = kPi / (2.0 * w_peak);
  CHECK(std::abs(tau_peak - kPi / (2.0 * peak)) <= step + 1e-12);
  CHECK(std::abs(*it / line(peak) - 1.0) < 0.1);
}

TEST_CASE("six-carbon spectrum peaks near the Larmor frequency") {
  const auto cfg = default_config();
  const auto taus = linear_grid(0.2, 3.0, 0.01);
  const std::vector<CoherenceTrace> traces{coherence_scan(cfg.carbons, cfg.constants, taus, 16)};
  const auto rec = reconstruct_spectrum(traces);
  const auto& s = rec.spectrum;
  const auto it = std::max_element(s.s.begin(), s.s.end());
  const double w_peak = s.omega[static_cast<std::size_t>(it - s.s.begin())];
  const double wl = std::abs(larmor_frequency(cfg.constants));
  CHECK(std::abs(w_peak - wl) < 0.1 * wl);
}
