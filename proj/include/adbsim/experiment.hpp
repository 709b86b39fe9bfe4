#pragma once

// Declarative experiment runner: flat "dotted.key = value" configs, scenario
// presets, grid expansion, a worker pool, and CSV/JSON emission.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adbsim/analysis.hpp"
#include "adbsim/dynamics.hpp"
#include "adbsim/model.hpp"

namespace adb {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Preset { table1, fig3, fig4_rp_sweep, fig5_contour, fig6_noise_grid, fig7_tdb_populations, custom };

std::string to_string(Preset p);
Preset preset_from_string(const std::string& name);

struct GridAxis {
  std::string key;  // e.g. "model.r_p", "noise.eta"
  std::vector<double> values;
};

struct ExperimentConfig {
  Preset scenario = Preset::custom;
  ModelTier tier = ModelTier::effective;
  /// ModelSpec field name -> value (without the "model." prefix).
  std::map<std::string, double> model;
  std::vector<GridAxis> grid;
  std::optional<double> dt;
  std::optional<double> t_end;
  double record_interval = 1.0;
  std::optional<double> t_f;
  NoiseSpec noise;
  StabilizationCriterion criterion;
  /// "gg" or "ground_mixed" (uniform over gg, ff, T, S).
  std::string initial_state = "gg";
  std::string output_dir;
  std::uint64_t seed = 0;
  double audit_t_end = 200.0;
};

/// Parses flat config text. Lines are "key = value"; '#' starts a comment.
/// Grid values are "v1, v2, ..." or "start:stop:step" (inclusive).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Resolved single integration.
struct RunRequest {
  std::string label;
  ScenarioTag tag = ScenarioTag::TDB;
  ModelTier tier = ModelTier::effective;
  ModelSpec spec;
  IntegratorConfig integrator;
  std::optional<NoiseSpec> noise;
  std::optional<double> fixed_tf;
  StabilizationCriterion criterion;
  std::string initial_state = "gg";
  std::map<std::string, double> coords;

  /// Deterministic text form of every resolved field.
  std::string canonical() const;
};

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string fingerprint(const std::string& text);

/// Reference parameters with r_p/K taken from `model` or `coords`, then explicit overrides.
ModelSpec resolve_spec(const std::map<std::string, double>& model, ModelTier tier);

/// dt that divides record_interval and satisfies dt * fastest <= 0.1 (and dt <= 0.1).
double default_dt(const CompiledModel& model, double record_interval);

/// Smallest Fock cutoff whose truncated squeezed vacuum has norm >= 0.999, plus 2.
std::size_t lab_frame_cutoff(double r_p);

/// Default squeezed-mode frequency of the lab tier in units of g; sets delta_c = omega_sc cosh(2 r_p).
inline constexpr double kLabOmegaSc = 5.0;

std::vector<RunRequest> expand(const ExperimentConfig& cfg);

DensityMatrix initial_state(const CompiledModel& model, const std::string& kind);

struct ResultRecord {
  std::string label;
  std::string fingerprint;
  RunSummary summary;
  std::map<std::string, double> coords;
  std::string series_file;
};

struct RunOutput {
  ResultRecord record;
  Trajectory trajectory;
};

RunOutput execute(const RunRequest& req);

/// Runs requests on `workers` threads; output order follows the input order.
/// The first failure (by input index) is rethrown after all workers stop.
std::vector<RunOutput> run_requests(const std::vector<RunRequest>& reqs, std::size_t workers);

/// Expands, runs and (when output_dir is set) writes <label>.csv, summary.json and
/// scenario-specific aggregates.
std::vector<RunOutput> run_scenario(const ExperimentConfig& cfg, std::size_t workers = 1);

// ------------------------------------------------------------------ schemas

inline constexpr const char* kTimeseriesHeader = "t,P_S,P_T,P_gg,P_ff,P_D,xi1,xi2,V_S,F";

void write_timeseries_csv(std::ostream& os, const Trajectory& traj);

struct TimeseriesRow {
  double t, P_S, P_T, P_gg, P_ff, P_D, xi1, xi2, V_S, F;
};

/// Throws ConfigError on header mismatch, malformed rows, non-monotone times or
/// populations outside [0, 1].
std::vector<TimeseriesRow> read_timeseries_csv(std::istream& is);

std::string summary_json(const std::vector<ResultRecord>& records);

struct Table1Target {
  ScenarioTag tag;
  double t_S, t_S_rel_tol, F, F_tol;
};
const std::vector<Table1Target>& table1_targets();

std::string render_table1(const std::vector<ResultRecord>& records);

// ------------------------------------------------------------- convergence

struct ConvergenceReport {
  std::string label;
  double max_dP_cutoff = 0.0;
  double max_dP_dt = 0.0;
  /// |dP(dt, dt/2)| / |dP(dt/2, dt/4)|, about 16 for a fourth-order method.
  double dt_ratio = 0.0;
  bool cutoff_ok = false;
  bool dt_ok = false;
  bool passes() const { return cutoff_ok && dt_ok; }
};

/// Reruns the first run of the config up to audit_t_end with doubled cutoff and halved dt.
/// Rejects the effective tier.
ConvergenceReport convergence_audit(const ExperimentConfig& cfg);

}  // namespace adb
