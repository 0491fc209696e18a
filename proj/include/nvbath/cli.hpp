#pragma once

// Batch front end. Every command writes its artifacts plus manifest.json
// into the output directory; nothing is plotted.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nvbath {

struct RunSpec {
  std::string command;  // coherence-scan | entanglement-trace | spectrum | tomography-demo
                        // | calibrate | fit-decay | reproduce
  std::optional<std::filesystem::path> config_path;
  std::filesystem::path output_dir = ".";
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::vector<std::string> overrides;  // key=value, see apply_override

  // Command options; each command reads the ones it needs.
  std::optional<double> tau;
  int n = 16;
  int n_max = 128;
  double tau_min = 0.2;
  double tau_max = 3.0;
  double tau_step = 0.01;
  std::optional<double> prep_tau1;
  std::string state = "bell";  // bell | dephased | mixed
  double w = 0.6;
  std::uint64_t shots = 1000000;
  bool exact_counts = false;
  std::optional<std::filesystem::path> input;
  int carbon = 1;  // 1-based slot for calibrate
  std::optional<std::vector<double>> bounds;  // a_zz_min, a_zz_max, a_xz_min, a_xz_max
  bool with_floor = false;
  double synthetic_tc = 3.7;
  double noise = 0.0;
  std::string target;  // reproduce target
  std::vector<std::string> argv;  // recorded in the manifest
};

/// Runs one command. Returns 0 on success; on failure writes a single-line
/// diagnostic to `err` and returns nonzero.
int dispatch(const RunSpec& spec, std::ostream& err);

/// Parses arguments (argv[0] is the program name) and dispatches.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Reproduction targets accepted by `reproduce`.
std::vector<std::string> reproduce_targets();

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// 64-bit FNV-1a, hex encoded.
std::string content_hash(const std::string& data);

}  // namespace nvbath
