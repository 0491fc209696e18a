#include "nvbath/readout.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>

namespace nvbath {
namespace {

ComplexMatrix pauli(char c) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  switch (c) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw InvalidInput(std::string("unknown Pauli label '") + c + "'");
  }
  return m;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31U);
}

double draw_poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0.0;
  std::poisson_distribution<long long> dist(mean);
  return static_cast<double>(dist(rng));
}

// Lower-triangular T from the 16 parameters: 4 real diagonal entries
// followed by (re, im) of the 6 strictly lower entries in row order.
ComplexMatrix unpack(const Eigen::VectorXd& theta) {
  ComplexMatrix t = ComplexMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) t(i, i) = theta(i);
  int k = 4;
  for (int i = 1; i < 4; ++i) {
    for (int j = 0; j < i; ++j) {
      t(i, j) = Complex(theta(k), theta(k + 1));
      k += 2;
    }
  }
  return t;
}

Eigen::VectorXd pack(const ComplexMatrix& t) {
  Eigen::VectorXd theta(16);
  for (int i = 0; i < 4; ++i) theta(i) = t(i, i).real();
  int k = 4;
  for (int i = 1; i < 4; ++i) {
    for (int j = 0; j < i; ++j) {
      theta(k) = t(i, j).real();
      theta(k + 1) = t(i, j).imag();
      k += 2;
    }
  }
  return theta;
}

// Derivative of T with respect to parameter k (a single unit entry).
ComplexMatrix unit_direction(int k) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(16);
  e(k) = 1.0;
  return unpack(e);
}

struct Observation {
  ComplexMatrix observable;
  double shots = 0.0;
  double counts = 0.0;
};

struct Evaluation {
  double log_likelihood = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd information;  // observed: minus the Hessian
};

ComplexMatrix state_of(const Eigen::VectorXd& theta) {
  const ComplexMatrix t = unpack(theta);
  const ComplexMatrix a = t.adjoint() * t;
  return a / a.trace().real();
}

double log_likelihood(const Eigen::VectorXd& theta, std::span<const Observation> obs,
                      const ReadoutCalibration& cal, double total_shots) {
  const ComplexMatrix rho = state_of(theta);
  double ll = 0.0;
  for (const auto& o : obs) {
    const double p = 0.5 * (1.0 + (rho * o.observable).trace().real());
    const double mu = o.shots * (cal.rate_dark + p * (cal.rate_bright - cal.rate_dark));
    if (mu > 0.0) {
      ll += o.counts * std::log(mu) - mu;
    } else if (o.counts > 0.0) {
      return -std::numeric_limits<double>::infinity();
    }
  }
  return ll / total_shots;
}

Evaluation evaluate(const Eigen::VectorXd& theta, std::span<const Observation> obs,
                    const ReadoutCalibration& cal, double total_shots) {
  const ComplexMatrix t = unpack(theta);
  const ComplexMatrix a = t.adjoint() * t;
  const double norm = a.trace().real();
  const ComplexMatrix rho = a / norm;

  // First and second derivatives of rho = A / Tr A with A = T^dagger T.
  std::array<ComplexMatrix, 16> dirs;
  std::array<ComplexMatrix, 16> drho;
  std::array<double, 16> dnorm{};
  for (std::size_t k = 0; k < 16; ++k) {
    dirs[k] = unit_direction(static_cast<int>(k));
    const ComplexMatrix da = dirs[k].adjoint() * t + t.adjoint() * dirs[k];
    dnorm[k] = da.trace().real();
    drho[k] = (da - rho * dnorm[k]) / norm;
  }
  std::vector<ComplexMatrix> d2rho(16 * 16);
  for (std::size_t k = 0; k < 16; ++k) {
    for (std::size_t l = k; l < 16; ++l) {
      const ComplexMatrix d2a = dirs[k].adjoint() * dirs[l] + dirs[l].adjoint() * dirs[k];
      const double d2n = d2a.trace().real();
      d2rho[k * 16 + l] = (d2a - drho[k] * dnorm[l] - drho[l] * dnorm[k] - rho * d2n) / norm;
    }
  }

  Evaluation out;
  out.gradient = Eigen::VectorXd::Zero(16);
  out.information = Eigen::MatrixXd::Zero(16, 16);
  const double contrast = cal.rate_bright - cal.rate_dark;
  Eigen::VectorXd dmu(16);
  for (const auto& o : obs) {
    const double p = 0.5 * (1.0 + (rho * o.observable).trace().real());
    const double mu = o.shots * (cal.rate_dark + p * contrast);
    if (mu <= 0.0) continue;
    for (std::size_t k = 0; k < 16; ++k) {
      dmu(static_cast<Eigen::Index>(k)) = o.shots * contrast * 0.5 * (drho[k] * o.observable).trace().real();
    }
    const double residual = o.counts / mu - 1.0;
    out.log_likelihood += o.counts * std::log(mu) - mu;
    out.gradient += residual * dmu;
    out.information += (o.counts / (mu * mu)) * dmu * dmu.transpose();
    for (std::size_t k = 0; k < 16; ++k) {
      for (std::size_t l = k; l < 16; ++l) {
        const double d2mu = o.shots * contrast * 0.5 * (d2rho[k * 16 + l] * o.observable).trace().real();
        const auto kk = static_cast<Eigen::Index>(k);
        const auto ll = static_cast<Eigen::Index>(l);
        out.information(kk, ll) -= residual * d2mu;
        if (l != k) out.information(ll, kk) -= residual * d2mu;
      }
    }
  }
  out.log_likelihood /= total_shots;
  out.gradient /= total_shots;
  out.information /= total_shots;
  return out;
}

}  // namespace

PauliSetting PauliSetting::parse(std::string_view label) {
  if (label.size() != 2) throw InvalidInput("setting label must have two characters");
  PauliSetting s{label[0], label[1]};
  pauli(s.electron);
  pauli(s.nitrogen);
  return s;
}

std::vector<PauliSetting> pauli_settings() {
  std::vector<PauliSetting> out;
  for (char a : {'I', 'X', 'Y', 'Z'}) {
    for (char b : {'I', 'X', 'Y', 'Z'}) out.push_back({a, b});
  }
  return out;
}

ComplexMatrix pauli_observable(const PauliSetting& setting) {
  return kron(pauli(setting.electron), pauli(setting.nitrogen));
}

double setting_probability(const DensityMatrix& rho, const PauliSetting& setting) {
  if (rho.dim() != 4) throw InvalidInput("setting_probability: expects a two-qubit state");
  const double expectation = (rho.matrix() * pauli_observable(setting)).trace().real();
  return std::clamp(0.5 * (1.0 + expectation), 0.0, 1.0);
}

void ReadoutCalibration::validate() const {
  if (!(rate_dark >= 0.0) || !(rate_bright > rate_dark)) {
    throw InvalidInput("readout calibration: need rate_bright > rate_dark >= 0");
  }
}

void CountsRecord::validate() const {
  if (shots < 1) throw InvalidInput("counts record: shots must be at least 1");
  if (!(c_bright > c_dark)) throw InvalidInput("counts record: bright counts must exceed dark counts");
}

double readout_probability(const CountsRecord& record) {
  const double contrast = record.c_bright - record.c_dark;
  if (!(contrast != 0.0)) throw InvalidInput("readout_probability: zero readout contrast");
  return (record.c_signal - record.c_dark) / contrast;
}

std::vector<CountsRecord> simulate_counts(const DensityMatrix& rho,
                                          std::span<const PauliSetting> settings,
                                          std::uint64_t shots, const ReadoutCalibration& cal,
                                          std::uint64_t seed, CountMode mode) {
  if (shots < 1) throw InvalidInput("simulate_counts: shots must be at least 1");
  cal.validate();
  const double n = static_cast<double>(shots);
  std::vector<CountsRecord> out;
  out.reserve(settings.size());
  std::map<std::string, std::uint64_t> occurrences;
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const double p = setting_probability(rho, settings[i]);
    const double mean_signal = n * (p * cal.rate_bright + (1.0 - p) * cal.rate_dark);
    CountsRecord rec;
    rec.setting = settings[i].label();
    rec.shots = shots;
    if (mode == CountMode::Exact) {
      rec.c_signal = mean_signal;
      rec.c_bright = n * cal.rate_bright;
      rec.c_dark = n * cal.rate_dark;
    } else {
      // Sub-seed keyed on (label, repeat index) so that subsets and
      // reorderings of the setting list draw the same counts.
      const std::uint64_t repeat = occurrences[rec.setting]++;
      const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<unsigned char>(settings[i].electron)) << 40U) |
                                (static_cast<std::uint64_t>(static_cast<unsigned char>(settings[i].nitrogen)) << 32U) |
                                repeat;
      std::mt19937_64 rng(splitmix64(seed ^ splitmix64(key + 1)));
      rec.c_signal = draw_poisson(rng, mean_signal);
      rec.c_bright = draw_poisson(rng, n * cal.rate_bright);
      rec.c_dark = draw_poisson(rng, n * cal.rate_dark);
    }
    out.push_back(rec);
  }
  return out;
}

DensityMatrix linear_inversion(std::span<const CountsRecord> records) {
  std::map<std::string, std::pair<double, int>> expectation;
  for (const auto& rec : records) {
    const auto setting = PauliSetting::parse(rec.setting);
    auto& slot = expectation[setting.label()];
    slot.first += std::clamp(2.0 * readout_probability(rec) - 1.0, -1.0, 1.0);
    slot.second += 1;
  }
  ComplexMatrix m = identity(4) / 4.0;
  for (const auto& s : pauli_settings()) {
    if (s.label() == "II") continue;
    const auto it = expectation.find(s.label());
    if (it == expectation.end()) {
      throw InvalidInput("tomography: settings are not informationally complete (missing " +
                         s.label() + ")");
    }
    m += (it->second.first / it->second.second) / 4.0 * pauli_observable(s);
  }
  return DensityMatrix::project(m);
}

MleResult mle_reconstruct(std::span<const CountsRecord> records, const ReadoutCalibration& cal,
                          const MleOptions& options) {
  cal.validate();
  for (const auto& rec : records) rec.validate();
  const DensityMatrix start = linear_inversion(records);

  std::vector<Observation> obs;
  double total_shots = 0.0;
  for (const auto& rec : records) {
    obs.push_back({pauli_observable(PauliSetting::parse(rec.setting)),
                   static_cast<double>(rec.shots), rec.c_signal});
    total_shots += static_cast<double>(rec.shots);
  }

  // Start slightly inside the physical set so every Cholesky factor is nonzero.
  const ComplexMatrix seed_state = 0.99 * start.matrix() + 0.01 * identity(4) / 4.0;
  // seed_state = T^dagger T with T lower triangular: Cholesky of the
  // index-reversed matrix, reversed back.
  const ComplexMatrix reversed = seed_state.colwise().reverse().rowwise().reverse();
  const ComplexMatrix l = reversed.llt().matrixL();
  const ComplexMatrix upper = l.colwise().reverse().rowwise().reverse();
  Eigen::VectorXd theta = pack(upper.adjoint());

  Evaluation current = evaluate(theta, obs, cal, total_shots);
  double lambda = 1e-3;
  int iter = 0;
  bool stalled = false;
  std::vector<double> history{current.log_likelihood};
  for (; iter < options.max_iterations; ++iter) {
    if (current.gradient.norm() < options.gradient_tolerance) break;
    // A rank-deficient optimum leaves residual gradient in rows of T that
    // have shrunk to zero; stop once the likelihood no longer moves.
    if (history.size() > 10) {
      const double gain = history.back() - history[history.size() - 11];
      if (gain <= 1e-14 * std::abs(history.back())) {
        stalled = true;
        break;
      }
    }
    bool improved = false;
    while (lambda < 1e12) {
      Eigen::MatrixXd damped = current.information;
      const Eigen::VectorXd diag = current.information.diagonal().cwiseAbs();
      const double scale = std::max(diag.maxCoeff(), 1e-300);
      damped.diagonal().array() += lambda * (diag.array() + scale);
      const Eigen::VectorXd step = damped.ldlt().solve(current.gradient);
      Eigen::VectorXd trial = theta + step;
      trial /= unpack(trial).norm();  // fix the scale gauge, Tr(T^dagger T) = 1
      const double ll = log_likelihood(trial, obs, cal, total_shots);
      if (std::isfinite(ll) && ll >= current.log_likelihood) {
        theta = trial;
        current = evaluate(theta, obs, cal, total_shots);
        lambda = std::max(lambda / 3.0, 1e-12);
        history.push_back(current.log_likelihood);
        improved = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!improved) {
      stalled = true;  // no ascent direction left at machine precision
      break;
    }
  }

  const double gnorm = current.gradient.norm();
  DensityMatrix best(state_of(theta));
  if (gnorm >= options.gradient_tolerance && !stalled) {
    throw MleConvergenceError("mle_reconstruct: gradient norm " + std::to_string(gnorm) +
                                  " after " + std::to_string(iter) + " iterations",
                              best, gnorm);
  }
  return {best, iter, gnorm, current.log_likelihood};
}

}  // namespace nvbath
