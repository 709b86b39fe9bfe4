#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "adbsim/experiment.hpp"
#include "json.hpp"

using namespace adb;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kShortCustom = R"(
scenario = custom          # two-point sweep
model.tier = effective
model.K1 = 1
model.K2 = 0.15
grid.model.r_p = 0.5, 1.0
integrator.t_end = 40
)";

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(R"(
# comment line
scenario = fig6_noise_grid
model.tier = full
model.fock_cutoff = 3
model.r_p = 1.5
grid.noise.eta = 0:0.01:0.005
integrator.record_interval = 0.5
output.dir = /tmp/x
seed = 42
)");
  CHECK(cfg.scenario == Preset::fig6_noise_grid);
  CHECK(cfg.tier == ModelTier::full_squeezed);
  CHECK(cfg.model.at("fock_cutoff") == 3.0);
  REQUIRE(cfg.grid.size() == 1);
  CHECK(cfg.grid[0].values.size() == 3);
  CHECK(cfg.grid[0].values[2] == doctest::Approx(0.01));
  CHECK(cfg.record_interval == 0.5);
  CHECK(cfg.output_dir == "/tmp/x");
  CHECK(cfg.seed == 42);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("scenario = nope"), ConfigError);
  CHECK_THROWS_AS(parse_config("model.bogus = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("model.r_p = two"), ConfigError);
  CHECK_THROWS_AS(parse_config("model.r_p = 1\nmodel.r_p = 2"), ConfigError);
  CHECK_THROWS_AS(parse_config("just text"), ConfigError);
  CHECK_THROWS_AS(parse_config("scenario = custom"), ConfigError);
  CHECK_THROWS_AS(parse_config("scenario = custom\ngrid.model.r_p = ,"), ConfigError);
  CHECK_THROWS_AS(parse_config("scenario = table1\ngrid.model.r_p = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("noise.eta = -0.1"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid.model.r_p = 1:0:0.1\nscenario = custom"), ConfigError);
  CHECK_THROWS_AS(parse_config("model.tier = imaginary"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.cfg"), ConfigError);
  CHECK_THROWS_AS(expand(parse_config("scenario = fig7_tdb_populations\nmodel.gamma = -1")), ConfigError);
  CHECK_THROWS_AS(expand(parse_config("scenario = fig7_tdb_populations\nmodel.tier = full\nintegrator.dt = 1")),
                  ConfigError);
}

TEST_CASE("table1 expands to the four rows") {
  ExperimentConfig cfg;
  cfg.scenario = Preset::table1;
  const auto reqs = expand(cfg);
  REQUIRE(reqs.size() == 4);
  CHECK(reqs[0].tag == ScenarioTag::TDB);
  CHECK(reqs[1].tag == ScenarioTag::PM);
  CHECK(reqs[2].tag == ScenarioTag::PA);
  CHECK(reqs[3].tag == ScenarioTag::ADB);
  CHECK(reqs[1].spec.K1 == 1.0);
  CHECK(reqs[1].spec.K2 == 0.15);
  CHECK(reqs[2].spec.K1 == 0.0);
  CHECK(reqs[3].spec.r_p == 2.0);
  CHECK(reqs[3].spec.r_e == 2.0);
  CHECK(reqs[3].spec.omega0 == doctest::Approx(0.1 * std::cosh(2.0)));
  for (const auto& r : reqs) {
    CHECK(r.tier == ModelTier::effective);
    const double records = r.integrator.dt * static_cast<double>(r.integrator.record_stride);
    CHECK(records == doctest::Approx(1.0));
  }
}

TEST_CASE("preset grid sizes") {
  auto count = [](const char* text) { return expand(parse_config(text)).size(); };
  CHECK(count("scenario = fig3") == 2);
  CHECK(count("scenario = fig4_rp_sweep") == 14);
  CHECK(count("scenario = fig5_contour") == 13);
  CHECK(count("scenario = fig6_noise_grid") == 121);
  CHECK(count("scenario = fig7_tdb_populations") == 1);
  CHECK(count(kShortCustom) == 2);
  const auto noise = expand(parse_config("scenario = fig6_noise_grid"));
  CHECK(noise[0].fixed_tf == 160.0);
  CHECK_FALSE(noise[0].noise.has_value());
  CHECK(noise[120].noise->lambda == doctest::Approx(0.05));
}

TEST_CASE("lab tier resolution picks a cutoff and detuning") {
  const auto reqs = expand(parse_config("scenario = custom\nmodel.tier = lab\ngrid.model.r_p = 0.5\nintegrator.t_end = 1"));
  REQUIRE(reqs.size() == 1);
  CHECK(reqs[0].spec.delta_c.has_value());
  CHECK_NOTHROW(squeezed_vacuum_ket(0.5, reqs[0].spec.fock_cutoff));
}

TEST_CASE("fingerprints are deterministic and sensitive") {
  const auto a = expand(parse_config(kShortCustom));
  const auto b = expand(parse_config(kShortCustom));
  CHECK(fingerprint(a[0].canonical()) == fingerprint(b[0].canonical()));
  CHECK(fingerprint(a[0].canonical()) != fingerprint(a[1].canonical()));
  CHECK(fingerprint("").size() == 16);
}

TEST_CASE("identical configs give bit-identical CSV and worker count does not matter") {
  const auto dir = std::filesystem::temp_directory_path() / "adbsim_unit_determinism";
  std::filesystem::remove_all(dir);
  auto cfg = parse_config(kShortCustom);
  cfg.output_dir = (dir / "a").string();
  const auto ra = run_scenario(cfg, 1);
  cfg.output_dir = (dir / "b").string();
  const auto rb = run_scenario(cfg, 2);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i].record.label == rb[i].record.label);
    const auto f = ra[i].record.series_file;
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK(slurp(dir / "a" / "summary.json") == slurp(dir / "b" / "summary.json"));

  // Round trip of the time series against the schema.
  std::ifstream in(dir / "a" / ra[0].record.series_file);
  const auto rows = read_timeseries_csv(in);
  CHECK(rows.size() == ra[0].trajectory.points.size());
  CHECK(rows.back().t == doctest::Approx(40.0));
  CHECK(rows[10].P_S == doctest::Approx(ra[0].trajectory.points[10].P_S).epsilon(1e-14));

  const auto j = nlohmann::ordered_json::parse(slurp(dir / "a" / "summary.json"));
  REQUIRE(j.is_array());
  std::vector<std::string> keys;
  for (const auto& [k, v] : j[0].items()) keys.push_back(k);
  const std::vector<std::string> expected = {"label", "fingerprint", "scenario", "tier",    "r_p",         "g_sc",
                                             "fidelity", "t_f",      "t_S",      "T",       "final_populations",
                                             "coords",   "series_file", "warnings"};
  CHECK(keys == expected);
  std::filesystem::remove_all(dir);
}

TEST_CASE("time-series reader rejects malformed input") {
  std::istringstream bad_header("t,P_S\n0,1\n");
  CHECK_THROWS_AS(read_timeseries_csv(bad_header), ConfigError);
  std::istringstream bad_range(std::string(kTimeseriesHeader) + "\n0,1.5,0,0,0,0,0,0,0,1\n");
  CHECK_THROWS_AS(read_timeseries_csv(bad_range), ConfigError);
  std::istringstream bad_time(std::string(kTimeseriesHeader) + "\n1,0,0,0,0,0,0,0,0,0\n0,0,0,0,0,0,0,0,0,0\n");
  CHECK_THROWS_AS(read_timeseries_csv(bad_time), ConfigError);
  std::istringstream short_row(std::string(kTimeseriesHeader) + "\n1,0,0\n");
  CHECK_THROWS_AS(read_timeseries_csv(short_row), ConfigError);
}

TEST_CASE("csv floats keep at least 12 significant digits") {
  Trajectory t;
  TrajectoryPoint p;
  p.t = 1.0 / 3.0;
  p.P_S = 0.123456789012345;
  t.points.push_back(p);
  std::ostringstream os;
  write_timeseries_csv(os, t);
  CHECK(os.str().find("0.333333333333333") != std::string::npos);
  CHECK(os.str().find("0.123456789012345") != std::string::npos);
}

TEST_CASE("convergence audit rejects the effective tier") {
  CHECK_THROWS_AS(convergence_audit(parse_config(kShortCustom)), ConfigError);
}

TEST_CASE("ground-mixed initial state") {
  const auto m = build_effective_model(reference_spec(0.0, 0.0, 0.0));
  const auto rho = initial_state(m, "ground_mixed");
  CHECK(rho.is_valid());
  CHECK(fidelity(rho, m.basis.S) == doctest::Approx(0.5));
  CHECK_THROWS_AS(initial_state(m, "nope"), ConfigError);
}
