#include "nvbath/trace_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "nvbath/errors.hpp"

namespace nvbath {
namespace {

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double parse_number(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line) + ": not a number: '" + s + "'");
  }
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.8e", x);
  return buf;
}

void write_xy_csv(std::ostream& out, const Metadata& meta, const std::vector<double>& x,
                  const std::vector<double>& y, const std::string& header) {
  if (x.size() != y.size()) throw InvalidInput("write_xy_csv: column size mismatch");
  for (const auto& [k, v] : meta) out << "# " << k << ": " << v << "\n";
  out << header << "\n";
  for (std::size_t i = 0; i < x.size(); ++i) out << format_number(x[i]) << "," << format_number(y[i]) << "\n";
}

void write_trace_csv(std::ostream& out, const CoherenceTrace& trace) {
  const Metadata meta{{"kind", "coherence"},
                      {"axis", trace.axis},
                      {"n", std::to_string(trace.n)},
                      {"carbons", join(trace.carbons, ' ')},
                      {"frame", trace.frame}};
  write_xy_csv(out, meta, trace.x, trace.w);
}

void write_trace_csv(std::ostream& out, const EntanglementTrace& trace) {
  const Metadata meta{{"kind", "concurrence"}, {"axis", "t_us"}, {"tau_us", format_number(trace.tau)}};
  write_xy_csv(out, meta, trace.t, trace.c);
}

void write_spectrum_csv(std::ostream& out, const NoiseSpectrum& spectrum, const Metadata& meta) {
  std::vector<double> f;
  f.reserve(spectrum.omega.size());
  for (double w : spectrum.omega) f.push_back(w / kTwoPi);  // rad/us -> MHz
  write_xy_csv(out, meta, f, spectrum.s, "omega_over_2pi_MHz,s_value");
}

void write_counts_csv(std::ostream& out, const std::vector<CountsRecord>& records) {
  out << "setting,shots,c_signal,c_bright,c_dark\n";
  for (const auto& r : records) {
    out << r.setting << "," << r.shots << "," << format_number(r.c_signal) << ","
        << format_number(r.c_bright) << "," << format_number(r.c_dark) << "\n";
  }
}

void write_density_matrix(std::ostream& out, const DensityMatrix& rho) {
  out << rho.dim() << "\n";
  for (Eigen::Index i = 0; i < rho.dim(); ++i) {
    for (Eigen::Index j = 0; j < rho.dim(); ++j) {
      out << i << " " << j << " " << format_number(rho(i, j).real()) << " "
          << format_number(rho(i, j).imag()) << "\n";
    }
  }
}

XyTable read_xy_csv(std::istream& in) {
  XyTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        table.meta[strip(line.substr(1, colon - 1))] = strip(line.substr(colon + 1));
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 2) throw ParseError("line " + std::to_string(line_no) + ": expected two columns");
    table.x.push_back(parse_number(strip(cols[0]), line_no));
    table.y.push_back(parse_number(strip(cols[1]), line_no));
  }
  if (!header_seen) throw ParseError("csv: missing header line");
  return table;
}

CoherenceTrace read_coherence_trace(std::istream& in) {
  const auto table = read_xy_csv(in);
  CoherenceTrace trace;
  const auto n = table.meta.find("n");
  if (n == table.meta.end()) throw ParseError("coherence trace: missing '# n:' metadata");
  trace.n = static_cast<int>(parse_number(n->second, 0));
  if (const auto axis = table.meta.find("axis"); axis != table.meta.end()) trace.axis = axis->second;
  if (const auto frame = table.meta.find("frame"); frame != table.meta.end()) trace.frame = frame->second;
  if (const auto c = table.meta.find("carbons"); c != table.meta.end()) trace.carbons = split(c->second, ' ');
  trace.x = table.x;
  trace.w = table.y;
  return trace;
}

std::vector<TimedValue> read_timed_values(std::istream& in) {
  const auto table = read_xy_csv(in);
  std::vector<TimedValue> out;
  for (std::size_t i = 0; i < table.x.size(); ++i) out.push_back({table.x[i], table.y[i]});
  return out;
}

std::vector<CountsRecord> read_counts_csv(std::istream& in) {
  std::vector<CountsRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 5) throw ParseError("line " + std::to_string(line_no) + ": expected five columns");
    CountsRecord rec;
    rec.setting = strip(cols[0]);
    rec.shots = static_cast<std::uint64_t>(parse_number(strip(cols[1]), line_no));
    rec.c_signal = parse_number(strip(cols[2]), line_no);
    rec.c_bright = parse_number(strip(cols[3]), line_no);
    rec.c_dark = parse_number(strip(cols[4]), line_no);
    out.push_back(rec);
  }
  return out;
}

DensityMatrix read_density_matrix(std::istream& in) {
  long long dim = 0;
  if (!(in >> dim) || dim < 1) throw ParseError("density matrix: bad dimension line");
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  std::vector<bool> seen(static_cast<std::size_t>(dim * dim), false);
  for (long long k = 0; k < dim * dim; ++k) {
    long long i = 0;
    long long j = 0;
    double re = 0.0;
    double im = 0.0;
    if (!(in >> i >> j >> re >> im)) throw ParseError("density matrix: truncated entry list");
    if (i < 0 || j < 0 || i >= dim || j >= dim || seen[static_cast<std::size_t>(i * dim + j)]) {
      throw ParseError("density matrix: bad or repeated index");
    }
    seen[static_cast<std::size_t>(i * dim + j)] = true;
    m(i, j) = Complex(re, im);
  }
  if (hermiticity_error(m) > 1e-6 || std::abs(m.trace() - Complex(1.0)) > 1e-6) {
    throw ParseError("density matrix: entries are not a unit-trace Hermitian matrix");
  }
  m = 0.5 * (m + m.adjoint()).eval();
  m /= m.trace().real();
  return DensityMatrix::project(m);
}

}  // namespace nvbath
