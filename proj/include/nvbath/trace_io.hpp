#pragma once

// Text formats. Numbers are written in scientific notation with nine
// significant digits; metadata lines start with '#'.
//
//   traces    # key: value ... / x,value / rows
//   spectra   # key: value ... / omega_over_2pi_MHz,s_value / rows
//   counts    setting,shots,c_signal,c_bright,c_dark / rows
//   matrices  dimension line, then dim^2 lines "row col re im"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "nvbath/dynamics.hpp"
#include "nvbath/metrics.hpp"
#include "nvbath/readout.hpp"
#include "nvbath/spectrum.hpp"

namespace nvbath {

std::string format_number(double x);

using Metadata = std::vector<std::pair<std::string, std::string>>;

void write_xy_csv(std::ostream& out, const Metadata& meta, const std::vector<double>& x,
                  const std::vector<double>& y, const std::string& header = "x,value");

void write_trace_csv(std::ostream& out, const CoherenceTrace& trace);
void write_trace_csv(std::ostream& out, const EntanglementTrace& trace);
void write_spectrum_csv(std::ostream& out, const NoiseSpectrum& spectrum, const Metadata& meta = {});
void write_counts_csv(std::ostream& out, const std::vector<CountsRecord>& records);
void write_density_matrix(std::ostream& out, const DensityMatrix& rho);

struct XyTable {
  std::map<std::string, std::string> meta;
  std::vector<double> x;
  std::vector<double> y;
};

/// Reads any two-column CSV written by write_xy_csv (first non-comment line is the header).
XyTable read_xy_csv(std::istream& in);

/// Coherence trace from a CSV; requires an `n` metadata entry.
CoherenceTrace read_coherence_trace(std::istream& in);
std::vector<TimedValue> read_timed_values(std::istream& in);
std::vector<CountsRecord> read_counts_csv(std::istream& in);

/// Reads a density matrix and restores exact Hermiticity and unit trace
/// (file precision is nine digits). Larger deviations are parse errors.
DensityMatrix read_density_matrix(std::istream& in);

}  // namespace nvbath
