#include "nvbath/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nvbath/config_io.hpp"
#include "nvbath/errors.hpp"
#include "nvbath/fit.hpp"
#include "nvbath/metrics.hpp"
#include "nvbath/readout.hpp"
#include "nvbath/spectrum.hpp"
#include "nvbath/trace_io.hpp"

namespace nvbath {
namespace {

constexpr const char* kVersion = "0.1.0";
using Json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  const RunSpec& spec;
  SystemConfig cfg;
  std::string requested_config;
  std::vector<std::string> outputs;
  Json notes = Json::object();
  std::string input_digest;

  void emit(const std::string& name, const std::string& content) {
    write_file_atomic(spec.output_dir / name, content);
    outputs.push_back(name);
  }
  template <class Writer>
  void emit_with(const std::string& name, Writer&& write) {
    std::ostringstream out;
    write(out);
    emit(name, out.str());
  }
};

Json number(double x) { return format_number(x); }

// -- commands ---------------------------------------------------------------

void run_coherence_scan(Run& run) {
  const auto taus = linear_grid(run.spec.tau_min, run.spec.tau_max, run.spec.tau_step);
  const auto trace = coherence_scan(run.cfg.carbons, run.cfg.constants, taus, run.spec.n, run.spec.threads);
  run.emit_with("coherence.csv", [&](std::ostream& o) { write_trace_csv(o, trace); });
}

EntanglementTrace trace_for(const Run& run, const std::vector<CarbonParams>& carbons, double tau,
                            int n_max) {
  EntanglementOptions opts;
  opts.prep_tau1 = run.spec.prep_tau1;
  const auto ns = even_counts(0, n_max);
  return entanglement_trace(carbons, run.cfg.constants, tau, ns, opts);
}

void emit_entanglement(Run& run, const std::string& name, const EntanglementTrace& trace) {
  run.emit_with(name, [&](std::ostream& o) { write_trace_csv(o, trace); });
  std::vector<TimedValue> tv;
  for (std::size_t i = 0; i < trace.t.size(); ++i) tv.push_back({trace.t[i], trace.c[i]});
  run.notes[name] = {{"blp_measure", number(blp_measure(tv))},
                     {"min_concurrence", number(*std::min_element(trace.c.begin(), trace.c.end()))}};
}

void run_entanglement_trace(Run& run) {
  if (!run.spec.tau) throw InvalidInput("entanglement-trace: --tau is required");
  emit_entanglement(run, "concurrence.csv", trace_for(run, run.cfg.carbons, *run.spec.tau, run.spec.n_max));
}

void run_spectrum(Run& run) {
  const auto taus = linear_grid(run.spec.tau_min, run.spec.tau_max, run.spec.tau_step);
  const auto trace = coherence_scan(run.cfg.carbons, run.cfg.constants, taus, run.spec.n, run.spec.threads);
  const std::vector<CoherenceTrace> traces{trace};
  const auto rec = reconstruct_spectrum(traces);
  run.emit_with("coherence.csv", [&](std::ostream& o) { write_trace_csv(o, trace); });
  run.emit_with("spectrum.csv", [&](std::ostream& o) {
    write_spectrum_csv(o, rec.spectrum, {{"method", "first-harmonic"}, {"n", std::to_string(run.spec.n)},
                                         {"skipped_points", std::to_string(rec.skipped.size())}});
  });
  run.notes["skipped_points"] = rec.skipped.size();
}

void run_tomography_demo(Run& run) {
  DensityMatrix truth = bell_state();
  if (run.spec.state == "dephased") {
    truth = dephased_bell_state(run.spec.w, 0.0);
  } else if (run.spec.state == "mixed") {
    truth = DensityMatrix::maximally_mixed(4);
  } else if (run.spec.state != "bell") {
    throw InvalidInput("tomography-demo: unknown state '" + run.spec.state + "'");
  }
  const ReadoutCalibration cal;
  const auto settings = pauli_settings();
  const auto records = simulate_counts(truth, settings, run.spec.shots, cal, run.spec.seed,
                                       run.spec.exact_counts ? CountMode::Exact : CountMode::Poisson);
  const auto mle = mle_reconstruct(records, cal);
  run.emit_with("counts.csv", [&](std::ostream& o) { write_counts_csv(o, records); });
  run.emit_with("rho_true.txt", [&](std::ostream& o) { write_density_matrix(o, truth); });
  run.emit_with("rho_mle.txt", [&](std::ostream& o) { write_density_matrix(o, mle.rho); });
  Json metrics{{"state", run.spec.state},
               {"shots", run.spec.shots},
               {"concurrence_true", number(concurrence(truth))},
               {"concurrence_mle", number(concurrence(mle.rho))},
               {"fidelity", number(fidelity(truth, mle.rho))},
               {"trace_distance", number(trace_distance(truth, mle.rho))},
               {"mle_iterations", mle.iterations},
               {"mle_gradient_norm", number(mle.gradient_norm)}};
  run.emit("metrics.json", metrics.dump(2) + "\n");
}

void run_calibrate(Run& run) {
  const auto& carbons = run.cfg.carbons;
  if (run.spec.carbon < 1 || static_cast<std::size_t>(run.spec.carbon) > carbons.size()) {
    throw InvalidInput("calibrate: --carbon must name a configured carbon (1-based)");
  }
  const auto slot = static_cast<std::size_t>(run.spec.carbon - 1);
  std::vector<CarbonParams> others;
  for (std::size_t k = 0; k < carbons.size(); ++k) {
    if (k != slot) others.push_back(carbons[k]);
  }
  CoherenceTrace measured;
  if (run.spec.input) {
    std::istringstream in(read_file(*run.spec.input));
    measured = read_coherence_trace(in);
  } else {
    // Noise-free synthetic scan around the target's third-order resonance.
    const auto taus = linear_grid(run.spec.tau_min, run.spec.tau_max, run.spec.tau_step);
    measured = coherence_scan(carbons, run.cfg.constants, taus, run.spec.n, run.spec.threads);
    run.emit_with("measured.csv", [&](std::ostream& o) { write_trace_csv(o, measured); });
  }
  HyperfineBounds bounds;
  if (run.spec.bounds) {
    const auto& b = *run.spec.bounds;
    if (b.size() != 4) throw InvalidInput("calibrate: --bounds needs four values");
    bounds = {b[0], b[1], b[2], b[3]};
  } else {
    const auto& k = carbons[slot];
    bounds = {k.a_zz_khz - 25.0, k.a_zz_khz + 25.0, std::max(0.0, k.a_xz_khz - 25.0), k.a_xz_khz + 25.0};
  }
  const auto fit = calibrate_hyperfine(measured, slot, bounds, others, run.cfg.constants);
  run.emit("fit.txt", fit.to_key_value());
  run.emit("fit.json", fit.to_json() + "\n");
}

void run_fit_decay(Run& run) {
  std::vector<TimedValue> data;
  if (run.spec.input) {
    std::istringstream in(read_file(*run.spec.input));
    data = read_timed_values(in);
  } else {
    std::mt19937_64 rng(run.spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double tc = run.spec.synthetic_tc;
    for (double t : linear_grid(0.0, 2.0 * tc, tc / 10.0)) {
      data.push_back({t, std::exp(-(t / tc) * (t / tc)) + run.spec.noise * gauss(rng)});
    }
    run.emit_with("decay.csv", [&](std::ostream& o) {
      std::vector<double> x;
      std::vector<double> y;
      for (const auto& p : data) {
        x.push_back(p.t);
        y.push_back(p.value);
      }
      write_xy_csv(o, {{"kind", "synthetic gaussian decay"}, {"tc_us", format_number(tc)}}, x, y);
    });
  }
  const auto fit = fit_gaussian_decay(data, run.spec.with_floor);
  run.emit("fit.txt", fit.to_key_value());
  run.emit("fit.json", fit.to_json() + "\n");
}

// -- reproduce --------------------------------------------------------------

std::vector<CarbonParams> pick(const SystemConfig& cfg, std::initializer_list<std::size_t> slots) {
  std::vector<CarbonParams> out;
  for (auto s : slots) {
    if (s < cfg.carbons.size()) out.push_back(cfg.carbons[s]);
  }
  return out;
}

void reproduce_free_decay(Run& run) {
  // Quasi-static detuning (1/e time 3.7 us) times the six-carbon free precession.
  const double sigma = sigma_for_coherence_time(3.7);
  std::vector<double> t = linear_grid(0.0, 12.0, 0.1);
  std::vector<double> c;
  std::vector<TimedValue> tv;
  for (double x : t) {
    const double w = quasi_static_coherence(sigma, x) *
                     sequence_coherence(run.cfg.carbons, run.cfg.constants, FreeEvolution{x});
    c.push_back(concurrence(dephased_bell_state(w, 0.0)));
    tv.push_back({x, c.back()});
  }
  run.emit_with("fig1c_concurrence.csv", [&](std::ostream& o) {
    write_xy_csv(o, {{"kind", "concurrence"}, {"axis", "t_us"}, {"sequence", "free"}}, t, c);
  });
  const auto fit = fit_gaussian_decay(tv);
  run.emit("fig1c_fit.json", fit.to_json() + "\n");
}

void reproduce_hahn(Run& run) {
  std::vector<double> t = linear_grid(2.0, 1200.0, 2.0);
  std::vector<double> c;
  for (double x : t) {
    const double w = sequence_coherence(run.cfg.carbons, run.cfg.constants, HahnEcho{0.5 * x});
    c.push_back(concurrence(dephased_bell_state(w, 0.0)));
  }
  run.emit_with("fig1d_concurrence.csv", [&](std::ostream& o) {
    write_xy_csv(o, {{"kind", "concurrence"}, {"axis", "t_us"}, {"sequence", "hahn"},
                     {"note", "six-carbon bath only; slow decay from unmodeled spins is absent"}},
                 t, c);
  });
}

void reproduce_tau_scan(Run& run, const std::string& prefix, double lo, double hi) {
  const auto taus = linear_grid(lo, hi, 0.01);
  const auto trace = coherence_scan(run.cfg.carbons, run.cfg.constants, taus, 16, run.spec.threads);
  run.emit_with(prefix + "_coherence.csv", [&](std::ostream& o) { write_trace_csv(o, trace); });
  std::vector<double> c;
  for (double w : trace.w) c.push_back(concurrence(dephased_bell_state(w, 0.0)));
  run.emit_with(prefix + "_concurrence.csv", [&](std::ostream& o) {
    write_xy_csv(o, {{"kind", "concurrence"}, {"axis", "tau_us"}, {"n", "16"}}, trace.x, c);
  });
}

void reproduce_target(Run& run, const std::string& target) {
  const auto& cfg = run.cfg;
  if (target == "fig1c") {
    reproduce_free_decay(run);
  } else if (target == "fig1d") {
    reproduce_hahn(run);
  } else if (target == "fig2b") {
    emit_entanglement(run, "fig2b_concurrence.csv", trace_for(run, cfg.carbons, 2.0, 400));
  } else if (target == "fig2c" || target == "fig3c") {
    emit_entanglement(run, target + "_concurrence.csv", trace_for(run, cfg.carbons, 0.47, 128));
  } else if (target == "fig2d" || target == "fig3d") {
    emit_entanglement(run, target + "_concurrence.csv", trace_for(run, cfg.carbons, 0.44, 128));
  } else if (target == "fig2e" || target == "fig3e") {
    emit_entanglement(run, target + "_concurrence.csv", trace_for(run, cfg.carbons, 0.51, 128));
  } else if (target == "fig3a") {
    reproduce_tau_scan(run, "fig3a", 0.3, 0.7);
  } else if (target == "fig4a") {
    const auto taus = linear_grid(0.2, 3.0, 0.01);
    const auto trace = coherence_scan(cfg.carbons, cfg.constants, taus, 16, run.spec.threads);
    run.emit_with("fig4a_coherence.csv", [&](std::ostream& o) { write_trace_csv(o, trace); });
  } else if (target == "fig4b") {
    emit_entanglement(run, "fig4b_carbon2.csv", trace_for(run, pick(cfg, {1}), 2.253, 128));
    emit_entanglement(run, "fig4b_bath.csv", trace_for(run, cfg.carbons, 2.253, 128));
  } else if (target == "fig4c") {
    emit_entanglement(run, "fig4c_carbon1.csv", trace_for(run, pick(cfg, {0}), 2.579, 128));
    emit_entanglement(run, "fig4c_bath.csv", trace_for(run, cfg.carbons, 2.579, 128));
  } else if (target == "all") {
    for (const auto& t : reproduce_targets()) {
      if (t != "all") reproduce_target(run, t);
    }
  } else {
    throw InvalidInput("reproduce: unknown target '" + target + "'");
  }
}

void run_reproduce(Run& run) {
  if (run.spec.target.empty()) throw InvalidInput("reproduce: a target is required");
  reproduce_target(run, run.spec.target);
}

const std::map<std::string, std::function<void(Run&)>>& commands() {
  static const std::map<std::string, std::function<void(Run&)>> table{
      {"coherence-scan", run_coherence_scan}, {"entanglement-trace", run_entanglement_trace},
      {"spectrum", run_spectrum},             {"tomography-demo", run_tomography_demo},
      {"calibrate", run_calibrate},           {"fit-decay", run_fit_decay},
      {"reproduce", run_reproduce}};
  return table;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

std::vector<std::string> reproduce_targets() {
  return {"fig1c", "fig1d", "fig2b", "fig2c", "fig2d", "fig2e", "fig3a",
          "fig3c", "fig3d", "fig3e", "fig4a", "fig4b", "fig4c", "all"};
}

std::string content_hash(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

int dispatch(const RunSpec& spec, std::ostream& err) {
  try {
    const auto& table = commands();
    const auto it = table.find(spec.command);
    if (it == table.end()) throw InvalidInput("unknown command '" + spec.command + "'");

    std::string config_source;
    SystemConfig cfg = default_config();
    if (spec.config_path) {
      config_source = read_file(*spec.config_path);
      cfg = parse_config(config_source);
    }
    for (const auto& o : spec.overrides) apply_override(cfg, o);

    Run run{spec, cfg, format_config(cfg), {}, Json::object(), {}};
    if (cfg.sample_uncertainties) run.cfg = sample_carbons(cfg, spec.seed);
    if (spec.input) run.input_digest = content_hash(read_file(*spec.input));

    std::filesystem::create_directories(spec.output_dir);
    it->second(run);

    const std::string effective = format_config(run.cfg);
    Json manifest{{"tool", "nvbath"},
                  {"version", kVersion},
                  {"command", spec.command},
                  {"argv", spec.argv},
                  {"seed", spec.seed},
                  {"threads", spec.threads},
                  {"overrides", spec.overrides},
                  {"config_path", spec.config_path ? spec.config_path->string() : std::string()},
                  {"config_source_hash", content_hash(config_source)},
                  {"config", effective},
                  {"config_hash", content_hash(effective)},
                  {"input_hash", run.input_digest},
                  {"inputs_hash", content_hash(effective + "\n" + run.input_digest + "\n" +
                                               Json(spec.argv).dump())},
                  {"outputs", run.outputs},
                  {"notes", run.notes}};
    if (cfg.sample_uncertainties) manifest["config_requested"] = run.requested_config;
    write_file_atomic(spec.output_dir / "manifest.json", manifest.dump(2) + "\n");
    return 0;
  } catch (const std::exception& e) {
    err << "nvbath: error: " << one_line(e.what()) << "\n";
    return 1;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunSpec spec;
  for (int i = 0; i < argc; ++i) spec.argv.emplace_back(argv[i]);
  if (const char* env = std::getenv("NVBATH_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    spec.output_dir = env;
  }

  CLI::App app{"Entanglement dynamics of an NV electron-nitrogen pair in a 13C bath", "nvbath"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config;
  std::string output_dir;
  app.add_option("--config", config, "Config file ([system], [constants], [[carbon]] tables)");
  app.add_option("-o,--output-dir", output_dir, "Output directory (default $NVBATH_OUTPUT_DIR or .)");
  app.add_option("--seed", spec.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", spec.threads, "Worker thread cap for scans")->capture_default_str();
  app.add_option("--set", spec.overrides, "Config override key=value (repeatable)");

  auto add_scan = [&](CLI::App* c) {
    c->add_option("--n", spec.n, "Pulse count")->capture_default_str();
    c->add_option("--tau-min", spec.tau_min, "First tau (us)")->capture_default_str();
    c->add_option("--tau-max", spec.tau_max, "Last tau (us)")->capture_default_str();
    c->add_option("--tau-step", spec.tau_step, "Tau step (us)")->capture_default_str();
  };

  auto* scan = app.add_subcommand("coherence-scan", "Electron coherence over a tau grid");
  add_scan(scan);

  auto* ent = app.add_subcommand("entanglement-trace", "Concurrence versus CPMG length");
  ent->add_option("--tau", spec.tau, "Half inter-pulse spacing (us)")->required();
  ent->add_option("--n-max", spec.n_max, "Largest pulse count")->capture_default_str();
  ent->add_option("--prep-tau1", spec.prep_tau1, "Include bath evolution during the preparation echo");

  auto* spec_cmd = app.add_subcommand("spectrum", "Coherence scan and first-harmonic spectrum");
  add_scan(spec_cmd);

  auto* tomo = app.add_subcommand("tomography-demo", "Synthetic counts and likelihood reconstruction");
  tomo->add_option("--state", spec.state, "bell | dephased | mixed")->capture_default_str();
  tomo->add_option("--w", spec.w, "Coherence of the dephased state")->capture_default_str();
  tomo->add_option("--shots", spec.shots, "Repetitions per setting")->capture_default_str();
  tomo->add_flag("--exact", spec.exact_counts, "Noise-free counts");

  std::string input;
  auto* cal = app.add_subcommand("calibrate", "Fit one carbon's hyperfine couplings to a tau scan");
  cal->add_option("--input", input, "Coherence trace CSV (default: synthetic from the config)");
  cal->add_option("--carbon", spec.carbon, "Carbon slot, 1-based")->capture_default_str();
  std::vector<double> bounds;
  cal->add_option("--bounds", bounds, "a_zz_min a_zz_max a_xz_min a_xz_max (kHz)")->expected(4);
  add_scan(cal);

  auto* fit = app.add_subcommand("fit-decay", "Gaussian decay fit");
  fit->add_option("--input", input, "CSV of (t, y) (default: synthetic)");
  fit->add_flag("--floor", spec.with_floor, "Fit a constant floor");
  fit->add_option("--tc", spec.synthetic_tc, "Decay time for synthetic data (us)")->capture_default_str();
  fit->add_option("--noise", spec.noise, "Gaussian noise on synthetic data")->capture_default_str();

  auto* rep = app.add_subcommand("reproduce", "Regenerate the data behind a figure");
  rep->add_option("target", spec.target, "Target name")->required()->check(CLI::IsMember(reproduce_targets()));

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "nvbath: error: " << one_line(e.what()) << "\n";
    return 2;
  }

  // Defaults that differ per command when the user left them alone.
  if (cal->parsed()) {
    if (cal->count("--tau-min") == 0) spec.tau_min = 2.3;
    if (cal->count("--tau-max") == 0) spec.tau_max = 2.9;
  }
  for (auto* sub : app.get_subcommands()) spec.command = sub->get_name();
  if (!config.empty()) spec.config_path = config;
  if (!output_dir.empty()) spec.output_dir = output_dir;
  if (!input.empty()) spec.input = input;
  if (!bounds.empty()) spec.bounds = bounds;
  return dispatch(spec, err);
}

}  // namespace nvbath
