#include "adbsim/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace adb {

void StabilizationCriterion::validate() const {
  if (!(v_threshold > 0.0) || !(vdot_threshold > 0.0)) throw AnalysisError("stabilization thresholds must be > 0");
}

std::string to_string(ScenarioTag tag) {
  switch (tag) {
    case ScenarioTag::TDB: return "TDB";
    case ScenarioTag::PM: return "PM";
    case ScenarioTag::PA: return "PA";
    case ScenarioTag::ADB: return "ADB";
  }
  return "?";
}

ScenarioTag scenario_tag_from_string(const std::string& name) {
  if (name == "TDB") return ScenarioTag::TDB;
  if (name == "PM") return ScenarioTag::PM;
  if (name == "PA") return ScenarioTag::PA;
  if (name == "ADB") return ScenarioTag::ADB;
  throw AnalysisError("unknown scenario tag '" + name + "'");
}

ScenarioTag classify(double r_p, double K1, double K2) {
  const bool fb = K1 > 0.0 || K2 > 0.0;
  if (r_p > 0.0) return fb ? ScenarioTag::ADB : ScenarioTag::PA;
  return fb ? ScenarioTag::PM : ScenarioTag::TDB;
}

double fidelity(const DensityMatrix& rho, const Ket& target) {
  require_same_layout(rho.layout_ptr(), target.layout_ptr(), "fidelity");
  const double p = target.amplitudes().dot(rho.matrix() * target.amplitudes()).real();
  return std::clamp(std::sqrt(std::max(p, 0.0)), 0.0, 1.0);
}

std::vector<double> speed_derivative(const Trajectory& traj) {
  const auto& p = traj.points;
  std::vector<double> out(p.size(), 0.0);
  if (p.size() < 2) return out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == p.size() ? i : i + 1;
    const double dt = p[hi].t - p[lo].t;
    out[i] = dt > 0.0 ? (p[hi].v.S - p[lo].v.S) / dt : 0.0;
  }
  return out;
}

std::optional<double> stabilization_time(const Trajectory& traj, const StabilizationCriterion& crit) {
  crit.validate();
  const auto& p = traj.points;
  if (p.empty()) return std::nullopt;
  const auto vdot = speed_derivative(traj);
  std::optional<double> t_s;
  for (std::size_t k = p.size(); k-- > 0;) {
    if (p[k].v.S <= crit.v_threshold && std::abs(vdot[k]) <= crit.vdot_threshold) {
      t_s = p[k].t;
    } else {
      break;
    }
  }
  return t_s;
}

RunSummary summarize(const Trajectory& traj, const CompiledModel& model, ScenarioTag tag,
                     const StabilizationCriterion& crit, std::optional<double> fixed_tf) {
  if (traj.points.empty()) throw AnalysisError("empty trajectory");
  RunSummary s;
  s.scenario = tag;
  s.tier = to_string(model.tier);
  s.r_p = model.spec.r_p;
  s.g_sc = model.spec.g_sc();
  s.t_S = stabilization_time(traj, crit);
  if (s.t_S) s.T = *s.t_S * s.g_sc;

  const double want = fixed_tf ? *fixed_tf : (s.t_S ? *s.t_S : traj.points.back().t);
  const auto it = std::min_element(traj.points.begin(), traj.points.end(), [&](const auto& a, const auto& b) {
    return std::abs(a.t - want) < std::abs(b.t - want);
  });
  s.t_f = it->t;
  s.fidelity = std::clamp(it->fidelity, 0.0, 1.0);

  const auto& last = traj.points.back();
  s.final_populations = {{"S", last.P_S}, {"T", last.P_T}, {"gg", last.P_gg}, {"ff", last.P_ff}, {"D", last.P_D}};
  s.warnings = traj.metadata.warnings;
  return s;
}

ScalingReport scaling_check(const std::vector<RunSummary>& runs, double tolerance) {
  if (runs.size() < 4) throw AnalysisError("scaling check needs at least 4 runs");
  ScalingReport rep;
  rep.tolerance = tolerance;
  double lo = runs.front().r_p, hi = runs.front().r_p;
  for (const auto& r : runs) {
    if (!r.T) throw AnalysisError("scaling check: run at r_p = " + std::to_string(r.r_p) + " has no t_S");
    rep.r_p.push_back(r.r_p);
    rep.T.push_back(*r.T);
    lo = std::min(lo, r.r_p);
    hi = std::max(hi, r.r_p);
  }
  if (lo > 1.0 + 1e-12 || hi < 2.5 - 1e-12) throw AnalysisError("scaling check: r_p grid must span [1, 2.5]");
  for (double t : rep.T) rep.mean += t;
  rep.mean /= static_cast<double>(rep.T.size());
  for (double t : rep.T) rep.max_relative_deviation = std::max(rep.max_relative_deviation, std::abs(t - rep.mean) / rep.mean);
  rep.passes = rep.max_relative_deviation <= tolerance;
  return rep;
}

bool T_increases_with_rp(std::vector<RunSummary> runs) {
  if (runs.size() < 2) throw AnalysisError("monotonicity check needs at least 2 runs");
  std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.r_p < b.r_p; });
  for (const auto& r : runs)
    if (!r.T) throw AnalysisError("monotonicity check: run without t_S");
  for (std::size_t i = 1; i < runs.size(); ++i)
    if (!(*runs[i].T > *runs[i - 1].T)) return false;
  return true;
}

CooperativityReport cooperativity_report(const ModelSpec& spec) {
  if (!(spec.kappa > 0.0) || !(spec.gamma > 0.0)) throw AnalysisError("cooperativity needs kappa, gamma > 0");
  CooperativityReport r;
  r.C = spec.g * spec.g / (spec.kappa * spec.gamma);
  r.ratio = std::cosh(spec.r_p) * std::cosh(spec.r_p);
  r.C_sc = r.C * r.ratio;
  return r;
}

}  // namespace adb
