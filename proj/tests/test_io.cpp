#include <doctest.h>

#include <sstream>
#include <string>

#include "nvbath/config_io.hpp"
#include "nvbath/errors.hpp"
#include "nvbath/trace_io.hpp"
#include "test_support.hpp"

using namespace nvbath;

TEST_CASE("config round trip") {
  const auto cfg = default_config();
  const auto text = format_config(cfg);
  const auto back = parse_config(text);
  CHECK(back == cfg);
  CHECK(format_config(back) == text);

  auto odd = cfg;
  odd.constants.b_z_gauss = 0.1 + 0.2;
  odd.carbons[2].a_zz_khz = -1.0 / 3.0;
  odd.carbons[0].sigma_zz_khz = 0.03;
  CHECK(parse_config(format_config(odd)) == odd);
}

TEST_CASE("config parser keeps defaults and reads comments") {
  const auto cfg = parse_config(
      "# only a field\n"
      "[constants]\n"
      "b_z_gauss = 500   # gauss\n"
      "\n"
      "[[carbon]]\n"
      "a_zz_khz = 10\n"
      "a_xz_khz = 20\n");
  CHECK(cfg.constants.b_z_gauss == 500.0);
  CHECK(cfg.constants.q_mhz == default_config().constants.q_mhz);
  REQUIRE(cfg.carbons.size() == 1);
  CHECK(cfg.carbons[0].label == "C1");
  CHECK(cfg.carbons[0].a_xz_khz == 20.0);
}

TEST_CASE("config errors name the line") {
  auto message_of = [](const std::string& text) {
    try {
      (void)parse_config(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const auto unknown_key = message_of("[system]\nelectron_levels = 2\nbogus = 1\n");
  CHECK(unknown_key.find("bogus") != std::string::npos);
  CHECK(unknown_key.find("line 3") != std::string::npos);
  const auto unknown_section = message_of("\n[nowhere]\n");
  CHECK(unknown_section.find("line 2") != std::string::npos);
  CHECK(message_of("[constants]\nq_mhz = abc\n").find("line 2") != std::string::npos);
  CHECK(message_of("[constants]\nq_mhz\n").find("line 2") != std::string::npos);
  CHECK(message_of("q_mhz = 1\n").find("line 1") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/path.toml"), ParseError);
}

TEST_CASE("overrides") {
  auto cfg = default_config();
  apply_override(cfg, "constants.b_z_gauss=420.5");
  CHECK(cfg.constants.b_z_gauss == 420.5);
  apply_override(cfg, "carbon.3.a_xz_khz = 12");
  CHECK(cfg.carbons[2].a_xz_khz == 12.0);
  apply_override(cfg, "system.sample_uncertainties=true");
  CHECK(cfg.sample_uncertainties);

  const auto c1 = cfg.carbons[0];
  const auto c2 = cfg.carbons[1];
  apply_override(cfg, "carbons=2,1");
  REQUIRE(cfg.carbons.size() == 2);
  CHECK(cfg.carbons[0] == c2);
  CHECK(cfg.carbons[1] == c1);

  CHECK_THROWS_AS(apply_override(cfg, "carbons=7"), ParseError);
  CHECK_THROWS_AS(apply_override(cfg, "carbon.9.a_zz_khz=1"), ParseError);
  CHECK_THROWS_AS(apply_override(cfg, "constants.nope=1"), ParseError);
  CHECK_THROWS_AS(apply_override(cfg, "nonsense"), ParseError);
  CHECK_THROWS_AS(apply_override(cfg, "x=1"), ParseError);
}

TEST_CASE("trace csv round trip") {
  CoherenceTrace trace;
  trace.n = 16;
  trace.carbons = {"C1", "C2"};
  for (int i = 0; i < 25; ++i) {
    trace.x.push_back(0.2 + 0.01 * i);
    trace.w.push_back(std::cos(0.37 * i) / 3.0);
  }
  std::stringstream ss;
  write_trace_csv(ss, trace);
  const auto back = read_coherence_trace(ss);
  CHECK(back.n == 16);
  REQUIRE(back.x.size() == trace.x.size());
  for (std::size_t i = 0; i < trace.x.size(); ++i) {
    CHECK(std::abs(back.x[i] - trace.x[i]) <= 5e-9 * std::abs(trace.x[i]));
    CHECK(std::abs(back.w[i] - trace.w[i]) <= 5e-9 * std::max(1e-300, std::abs(trace.w[i])));
  }

  std::stringstream timed;
  write_xy_csv(timed, {{"kind", "decay"}}, {0.0, 1.0, 2.0}, {1.0, 0.5, 0.25}, "t_us,value");
  const auto values = read_timed_values(timed);
  REQUIRE(values.size() == 3);
  CHECK(values[1].t == 1.0);
  CHECK(values[2].value == 0.25);

  std::stringstream missing_n("x,value\n1,2\n");
  CHECK_THROWS_AS(read_coherence_trace(missing_n), ParseError);
}

TEST_CASE("counts round trip") {
  const auto rho = dephased_bell_state(0.6, 0.3);
  const auto settings = pauli_settings();
  const auto records = simulate_counts(rho, settings, 100000, ReadoutCalibration{}, 11);
  std::stringstream ss;
  write_counts_csv(ss, records);
  const auto back = read_counts_csv(ss);
  CHECK(back == records);

  std::stringstream bad("setting,shots,c_signal,c_bright,c_dark\nXX,10,1\n");
  CHECK_THROWS_AS(read_counts_csv(bad), ParseError);
}

TEST_CASE("density matrix round trip") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 5; ++k) {
    const DensityMatrix rho(testing::random_state(rng, 4));
    std::stringstream ss;
    write_density_matrix(ss, rho);
    const auto back = read_density_matrix(ss);
    CHECK((back.matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::abs(back.matrix().trace().real() - 1.0) < 1e-14);
    CHECK((back.matrix() - back.matrix().adjoint()).cwiseAbs().maxCoeff() == 0.0);
  }
  std::stringstream truncated("4\n0 0 1 0\n");
  CHECK_THROWS_AS(read_density_matrix(truncated), ParseError);
}
