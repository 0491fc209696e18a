#include "nvbath/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nvbath/errors.hpp"

namespace nvbath {
namespace {

constexpr double kPi = std::numbers::pi;
// Absolute error budget per quadrature panel (chi scale).
constexpr double kPanelTolerance = 1e-14;

void check_even_positive(int n, const char* who) {
  if (n < 2 || n % 2 != 0) {
    throw InvalidInput(std::string(who) + ": pulse count must be even and at least 2");
  }
}

}  // namespace

void NoiseSpectrum::validate() const {
  if (omega.size() != s.size()) throw InvalidInput("NoiseSpectrum: size mismatch");
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (!(s[i] >= 0.0)) throw InvalidInput("NoiseSpectrum: values must be nonnegative");
    if (i > 0 && !(omega[i] > omega[i - 1])) {
      throw InvalidInput("NoiseSpectrum: omega must be strictly increasing");
    }
  }
}

double NoiseSpectrum::at(double w) const {
  if (omega.empty() || w < omega.front() || w > omega.back()) return 0.0;
  const auto it = std::upper_bound(omega.begin(), omega.end(), w);
  if (it == omega.end()) return s.back();
  const auto i = static_cast<std::size_t>(it - omega.begin());
  if (i == 0) return s.front();
  const double frac = (w - omega[i - 1]) / (omega[i] - omega[i - 1]);
  return s[i - 1] + frac * (s[i] - s[i - 1]);
}

double filter_function(double omega_t, int n) {
  check_even_positive(n, "filter_function");
  const double nn = static_cast<double>(n);
  const double y = omega_t / (2.0 * nn);
  // ratio = sin(N y) / cos(y). Near a zero of cos(y) write y = y0 + d with
  // cos(y0) = 0; for even N also sin(N y0) = 0, and exactly
  //   ratio = cos(N y0) / (-sin y0) * sin(N d) / sin(d).
  const double j = std::round(y / kPi - 0.5);
  const double y0 = (j + 0.5) * kPi;
  const double d = y - y0;
  double ratio = 0.0;
  if (std::abs(d) < 0.25) {
    const double sign = std::cos(nn * y0) / (-std::sin(y0));  // +-1
    const double dirichlet = d == 0.0 ? nn : std::sin(nn * d) / std::sin(d);
    ratio = sign * dirichlet;
  } else {
    ratio = std::sin(nn * y) / std::cos(y);
  }
  const double s4 = std::pow(std::sin(0.5 * y), 4);
  return 8.0 * ratio * ratio * s4;
}

FilterEvaluation evaluate_filter(std::span<const double> omega_t, int n) {
  FilterEvaluation out;
  out.n = n;
  out.omega_t.assign(omega_t.begin(), omega_t.end());
  out.f.reserve(omega_t.size());
  for (double x : omega_t) out.f.push_back(filter_function(x, n));
  return out;
}

ChiResult chi_from_spectrum(const NoiseSpectrum& spectrum, double t, int n) {
  check_even_positive(n, "chi_from_spectrum");
  if (!(t > 0.0)) throw InvalidInput("chi_from_spectrum: t must be positive");
  spectrum.validate();
  if (spectrum.omega.empty()) throw CoverageError("chi_from_spectrum: empty spectrum grid");

  const double nn = static_cast<double>(n);
  const double first = nn * kPi / t;  // pi / (2 tau)
  const double third = 5.0 * first;
  if (spectrum.omega.front() > first || spectrum.omega.back() < third) {
    throw CoverageError("chi_from_spectrum: spectrum grid must span the first three filter harmonics");
  }
  if (std::all_of(spectrum.s.begin(), spectrum.s.end(), [](double v) { return v == 0.0; })) {
    return {};
  }

  auto integrand = [&](double w) {
    if (w <= 0.0) return 0.0;
    return spectrum.at(w) / (w * w) * filter_function(w * t, n);
  };

  // Break points: grid nodes plus a uniform lattice of spacing pi/t, which
  // puts every filter lobe into its own panel.
  const double panel = kPi / t;
  double total = 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  for (std::size_t i = 0; i + 1 < spectrum.omega.size(); ++i) {
    const double a = spectrum.omega[i];
    const double b = spectrum.omega[i + 1];
    if (spectrum.s[i] == 0.0 && spectrum.s[i + 1] == 0.0) continue;
    double lo = a;
    while (lo < b) {
      const double next = std::min(b, (std::floor(lo / panel) + 1.0) * panel);
      const double hi = next - lo < 1e-15 * panel ? b : next;
      double err = 0.0;
      double l1 = 0.0;
      double part = GK::integrate(integrand, lo, hi, 0, 0.0, &err, &l1);
      if (err > kPanelTolerance) {
        part = GK::integrate(integrand, lo, hi, 15, std::max(1e-13, kPanelTolerance / l1), &err);
      }
      total += part;
      lo = hi;
    }
  }
  ChiResult out;
  out.chi = std::max(0.0, total / kPi);
  out.w = std::exp(-out.chi);
  out.p0 = 0.5 * (out.w + 1.0);
  return out;
}

SpectrumReconstruction reconstruct_spectrum(std::span<const CoherenceTrace> traces) {
  SpectrumReconstruction out;
  std::map<double, std::pair<double, int>> by_omega;  // omega -> (sum S, count)
  for (const auto& trace : traces) {
    if (trace.axis != "tau_us") {
      throw InvalidInput("reconstruct_spectrum: traces must be tau scans");
    }
    check_even_positive(trace.n, "reconstruct_spectrum");
    if (trace.x.size() != trace.w.size()) {
      throw InvalidInput("reconstruct_spectrum: trace size mismatch");
    }
    for (std::size_t i = 0; i < trace.x.size(); ++i) {
      const double tau = trace.x[i];
      const double w = trace.w[i];
      if (!(tau > 0.0)) {
        out.skipped.push_back({tau, w, "tau must be positive"});
        continue;
      }
      if (!(w > 0.0)) {
        out.skipped.push_back({tau, w, "coherence not positive, log undefined"});
        continue;
      }
      const double t = 2.0 * trace.n * tau;
      const double s = w >= 1.0 ? 0.0 : kPi * kPi * (-std::log(w)) / (4.0 * t);
      auto& slot = by_omega[kPi / (2.0 * tau)];
      slot.first += s;
      slot.second += 1;
    }
  }
  for (const auto& [omega, acc] : by_omega) {
    out.spectrum.omega.push_back(omega);
    out.spectrum.s.push_back(acc.first / acc.second);
  }
  return out;
}

}  // namespace nvbath
