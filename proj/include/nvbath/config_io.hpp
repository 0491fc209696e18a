#pragma once

// Text config format:
//
//   [system]      electron_levels, nitrogen_levels, sample_uncertainties
//   [constants]   delta_ghz, q_mhz, gamma_e_mhz_per_g, gamma_n_khz_per_g,
//                 gamma_c_khz_per_g, a_par_mhz, b_z_gauss
//   [[carbon]]    label, a_zz_khz, a_xz_khz, sigma_zz_khz, sigma_xz_khz
//
// One `key = value` per line, `#` starts a comment. Keys missing from
// [system]/[constants] keep their defaults; the bath is exactly the listed
// [[carbon]] tables. Unknown sections or keys are errors.

#include <filesystem>
#include <string>
#include <string_view>

#include "nvbath/model.hpp"

namespace nvbath {

SystemConfig parse_config(std::string_view text);
SystemConfig load_config(const std::filesystem::path& path);

/// Inverse of parse_config; numbers are written with full round-trip precision.
std::string format_config(const SystemConfig& cfg);

/// Applies a single `key=value` override.
///
/// Keys: `system.<key>`, `constants.<key>`, `carbon.<i>.<key>` (1-based), and
/// `carbons=<i,j,...>` which keeps only the listed carbons in that order.
void apply_override(SystemConfig& cfg, std::string_view assignment);

}  // namespace nvbath
