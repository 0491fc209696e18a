#include "nvbath/config_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "nvbath/errors.hpp"

namespace nvbath {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view v, std::string_view key) {
  const std::string str(trim(v));
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(str, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (str.empty() || used != str.size()) {
    throw ParseError("config: key '" + std::string(key) + "' expects a number, got '" + str + "'");
  }
  return out;
}

int to_int(std::string_view v, std::string_view key) {
  const auto s = trim(v);
  int out = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("config: key '" + std::string(key) + "' expects an integer");
  }
  return out;
}

bool to_bool(std::string_view v, std::string_view key) {
  const auto s = trim(v);
  if (s == "true") return true;
  if (s == "false") return false;
  throw ParseError("config: key '" + std::string(key) + "' expects true or false");
}

std::string to_string_value(std::string_view v) {
  auto s = trim(v);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::string fmt_double(double x) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

void set_system(SystemConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "electron_levels") {
    cfg.electron_levels = to_int(value, key);
  } else if (key == "nitrogen_levels") {
    cfg.nitrogen_levels = to_int(value, key);
  } else if (key == "sample_uncertainties") {
    cfg.sample_uncertainties = to_bool(value, key);
  } else {
    throw ParseError("config: unknown key 'system." + std::string(key) + "'");
  }
}

void set_constant(PhysicalConstants& c, std::string_view key, std::string_view value) {
  double* slot = nullptr;
  if (key == "delta_ghz") slot = &c.delta_ghz;
  else if (key == "q_mhz") slot = &c.q_mhz;
  else if (key == "gamma_e_mhz_per_g") slot = &c.gamma_e_mhz_per_g;
  else if (key == "gamma_n_khz_per_g") slot = &c.gamma_n_khz_per_g;
  else if (key == "gamma_c_khz_per_g") slot = &c.gamma_c_khz_per_g;
  else if (key == "a_par_mhz") slot = &c.a_par_mhz;
  else if (key == "b_z_gauss") slot = &c.b_z_gauss;
  if (slot == nullptr) throw ParseError("config: unknown key 'constants." + std::string(key) + "'");
  *slot = to_double(value, key);
}

void set_carbon(CarbonParams& k, std::string_view key, std::string_view value) {
  if (key == "label") k.label = to_string_value(value);
  else if (key == "a_zz_khz") k.a_zz_khz = to_double(value, key);
  else if (key == "a_xz_khz") k.a_xz_khz = to_double(value, key);
  else if (key == "sigma_zz_khz") k.sigma_zz_khz = to_double(value, key);
  else if (key == "sigma_xz_khz") k.sigma_xz_khz = to_double(value, key);
  else throw ParseError("config: unknown key 'carbon." + std::string(key) + "'");
}

}  // namespace

SystemConfig parse_config(std::string_view text) {
  SystemConfig cfg;
  cfg.carbons.clear();
  enum class Section { None, System, Constants, Carbon } section = Section::None;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = " (line " + std::to_string(line_no) + ")";
    if (line == "[system]") {
      section = Section::System;
    } else if (line == "[constants]") {
      section = Section::Constants;
    } else if (line == "[[carbon]]") {
      section = Section::Carbon;
      cfg.carbons.emplace_back();
      cfg.carbons.back().label = "C" + std::to_string(cfg.carbons.size());
    } else if (line.front() == '[') {
      throw ParseError("config: unknown section " + std::string(line) + where);
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError("config: expected key = value" + where);
      const auto key = trim(line.substr(0, eq));
      const auto value = trim(line.substr(eq + 1));
      try {
        switch (section) {
          case Section::System: set_system(cfg, key, value); break;
          case Section::Constants: set_constant(cfg.constants, key, value); break;
          case Section::Carbon: set_carbon(cfg.carbons.back(), key, value); break;
          case Section::None: throw ParseError("config: key outside of a section");
        }
      } catch (const ParseError& e) {
        throw ParseError(e.what() + where);
      }
    }
    if (end == text.size()) break;
  }
  cfg.validate();
  return cfg;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const SystemConfig& cfg) {
  std::ostringstream out;
  out << "[system]\n"
      << "electron_levels = " << cfg.electron_levels << "\n"
      << "nitrogen_levels = " << cfg.nitrogen_levels << "\n"
      << "sample_uncertainties = " << (cfg.sample_uncertainties ? "true" : "false") << "\n\n";
  const auto& c = cfg.constants;
  out << "[constants]\n"
      << "delta_ghz = " << fmt_double(c.delta_ghz) << "\n"
      << "q_mhz = " << fmt_double(c.q_mhz) << "\n"
      << "gamma_e_mhz_per_g = " << fmt_double(c.gamma_e_mhz_per_g) << "\n"
      << "gamma_n_khz_per_g = " << fmt_double(c.gamma_n_khz_per_g) << "\n"
      << "gamma_c_khz_per_g = " << fmt_double(c.gamma_c_khz_per_g) << "\n"
      << "a_par_mhz = " << fmt_double(c.a_par_mhz) << "\n"
      << "b_z_gauss = " << fmt_double(c.b_z_gauss) << "\n";
  for (const auto& k : cfg.carbons) {
    out << "\n[[carbon]]\n"
        << "label = \"" << k.label << "\"\n"
        << "a_zz_khz = " << fmt_double(k.a_zz_khz) << "\n"
        << "a_xz_khz = " << fmt_double(k.a_xz_khz) << "\n";
    if (k.sigma_zz_khz) out << "sigma_zz_khz = " << fmt_double(*k.sigma_zz_khz) << "\n";
    if (k.sigma_xz_khz) out << "sigma_xz_khz = " << fmt_double(*k.sigma_xz_khz) << "\n";
  }
  return out.str();
}

void apply_override(SystemConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ParseError("override: expected key=value, got '" + std::string(assignment) + "'");
  }
  const auto key = trim(assignment.substr(0, eq));
  const auto value = trim(assignment.substr(eq + 1));

  if (key == "carbons") {
    std::vector<CarbonParams> picked;
    std::size_t start = 0;
    while (start <= value.size()) {
      const auto comma = std::min(value.find(',', start), value.size());
      const auto item = trim(value.substr(start, comma - start));
      if (!item.empty()) {
        const int idx = to_int(item, key);
        if (idx < 1 || static_cast<std::size_t>(idx) > cfg.carbons.size()) {
          throw ParseError("override: carbon index out of range: " + std::string(item));
        }
        picked.push_back(cfg.carbons[static_cast<std::size_t>(idx - 1)]);
      }
      start = comma + 1;
    }
    cfg.carbons = std::move(picked);
    cfg.validate();
    return;
  }

  const auto dot = key.find('.');
  if (dot == std::string_view::npos) throw ParseError("override: unknown key '" + std::string(key) + "'");
  const auto head = key.substr(0, dot);
  const auto rest = key.substr(dot + 1);
  if (head == "system") {
    set_system(cfg, rest, value);
  } else if (head == "constants") {
    set_constant(cfg.constants, rest, value);
  } else if (head == "carbon") {
    const auto dot2 = rest.find('.');
    if (dot2 == std::string_view::npos) throw ParseError("override: expected carbon.<index>.<key>");
    const int idx = to_int(rest.substr(0, dot2), key);
    if (idx < 1 || static_cast<std::size_t>(idx) > cfg.carbons.size()) {
      throw ParseError("override: carbon index out of range in '" + std::string(key) + "'");
    }
    set_carbon(cfg.carbons[static_cast<std::size_t>(idx - 1)], rest.substr(dot2 + 1), value);
  } else {
    throw ParseError("override: unknown key '" + std::string(key) + "'");
  }
  cfg.validate();
}

}  // namespace nvbath
