#pragma once

// Reported quantities: fidelity, stabilization time, the dimensionless time
// T = t_S g_sc, cooperativities and r_p-sweep scaling checks.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "adbsim/dynamics.hpp"

namespace adb {

class AnalysisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct StabilizationCriterion {
  double v_threshold = 1e-5;     // [g]
  double vdot_threshold = 1e-6;  // [g^2]
  void validate() const;
};

enum class ScenarioTag { TDB, PM, PA, ADB };

std::string to_string(ScenarioTag tag);
ScenarioTag scenario_tag_from_string(const std::string& name);
/// PA/ADB when r_p > 0, feedback variants when a gain is nonzero.
ScenarioTag classify(double r_p, double K1, double K2);

struct RunSummary {
  ScenarioTag scenario = ScenarioTag::TDB;
  std::string tier;
  double r_p = 0.0;
  double g_sc = 1.0;
  double fidelity = 0.0;
  /// Time at which the fidelity was read: t_S when found (or a fixed t_f), else the last sample.
  double t_f = 0.0;
  std::optional<double> t_S;
  std::optional<double> T;
  /// Ordered S, T, gg, ff, D.
  std::vector<std::pair<std::string, double>> final_populations;
  std::vector<std::string> warnings;
};

/// sqrt(Re <target|rho|target>) clamped to [0, 1].
double fidelity(const DensityMatrix& rho, const Ket& target);

/// V_S at each record, and the centered finite difference of V_S over the record spacing
/// (one-sided at both ends).
std::vector<double> speed_derivative(const Trajectory& traj);

/// Earliest recorded t from which V_S <= v_threshold and |dV_S/dt| <= vdot_threshold
/// hold at every later record.
std::optional<double> stabilization_time(const Trajectory& traj,
                                         const StabilizationCriterion& crit = StabilizationCriterion{});

/// Builds a summary. With fixed_tf the fidelity is read at the record nearest to it;
/// otherwise at t_S, or the last record when t_S is absent.
RunSummary summarize(const Trajectory& traj, const CompiledModel& model, ScenarioTag tag,
                     const StabilizationCriterion& crit = StabilizationCriterion{},
                     std::optional<double> fixed_tf = std::nullopt);

struct ScalingReport {
  std::vector<double> r_p;
  std::vector<double> T;
  double mean = 0.0;
  double max_relative_deviation = 0.0;
  double tolerance = 0.25;
  bool passes = false;
};

/// Requires >= 4 runs spanning r_p in [1, 2.5], each with t_S.
ScalingReport scaling_check(const std::vector<RunSummary>& runs, double tolerance = 0.25);

/// True when T strictly increases with r_p (runs sorted internally). Requires t_S in every run.
bool T_increases_with_rp(std::vector<RunSummary> runs);

struct CooperativityReport {
  double C = 0.0;
  double C_sc = 0.0;
  double ratio = 1.0;
};

CooperativityReport cooperativity_report(const ModelSpec& spec);

}  // namespace adb
