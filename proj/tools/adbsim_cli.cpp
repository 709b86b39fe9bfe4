// adbsim: run experiment configs, convergence audits and the four-row comparison preset.
//
// Exit codes: 0 success, 2 config error, 3 integrator abort, 4 audit failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "adbsim/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kIntegratorAbort = 3;
constexpr int kAuditFailure = 4;

struct Options {
  std::size_t workers = 1;
  std::string out;
  std::string tier;
  std::string config;
  bool check = false;
};

void apply_flags(adb::ExperimentConfig& cfg, const Options& o) {
  if (!o.tier.empty()) cfg.tier = adb::tier_from_string(o.tier);
  if (!o.out.empty()) cfg.output_dir = o.out;
}

void print_records(const std::vector<adb::RunOutput>& results) {
  for (const auto& r : results) {
    const auto& s = r.record.summary;
    char ts[32];
    if (s.t_S) std::snprintf(ts, sizeof ts, "%.2f", *s.t_S);
    else std::snprintf(ts, sizeof ts, "none");
    std::printf("%-28s %-4s tier=%-13s r_p=%-5.2f t_S=%-9s F=%.6f (t_f=%.2f) %s\n", r.record.label.c_str(),
                adb::to_string(s.scenario).c_str(), s.tier.c_str(), s.r_p, ts, s.fidelity, s.t_f,
                r.record.fingerprint.c_str());
    for (const auto& w : s.warnings) std::printf("  warning: %s\n", w.c_str());
  }
}

bool table1_within_targets(const std::vector<adb::RunOutput>& results) {
  bool ok = true;
  for (const auto& tgt : adb::table1_targets())
    for (const auto& r : results) {
      const auto& s = r.record.summary;
      if (s.scenario != tgt.tag) continue;
      const bool t_ok = s.t_S && std::abs(*s.t_S - tgt.t_S) <= tgt.t_S_rel_tol * tgt.t_S;
      const bool f_ok = std::abs(s.fidelity - tgt.F) <= tgt.F_tol;
      ok = ok && t_ok && f_ok;
    }
  return ok;
}

int cmd_run(const Options& o) {
  auto cfg = adb::load_config(o.config);
  apply_flags(cfg, o);
  const auto results = adb::run_scenario(cfg, o.workers);
  print_records(results);
  if (cfg.scenario == adb::Preset::table1) {
    std::vector<adb::ResultRecord> recs;
    for (const auto& r : results) recs.push_back(r.record);
    std::cout << adb::render_table1(recs);
  }
  return kOk;
}

int cmd_audit(const Options& o) {
  auto cfg = adb::load_config(o.config);
  apply_flags(cfg, o);
  const auto rep = adb::convergence_audit(cfg);
  std::printf("convergence audit (%s)\n", rep.label.c_str());
  std::printf("  cutoff doubling: max |dP_S| = %.3e  [%s, limit 1e-3]\n", rep.max_dP_cutoff, rep.cutoff_ok ? "ok" : "FAIL");
  std::printf("  dt halving:      max |dP_S| = %.3e  [%s, limit 1e-6]\n", rep.max_dP_dt, rep.dt_ok ? "ok" : "FAIL");
  std::printf("  dt error ratio:  %.2f (fourth order: 16)\n", rep.dt_ratio);
  return rep.passes() ? kOk : kAuditFailure;
}

int cmd_table1(const Options& o) {
  adb::ExperimentConfig cfg;
  cfg.scenario = adb::Preset::table1;
  apply_flags(cfg, o);
  const auto results = adb::run_scenario(cfg, o.workers);
  std::vector<adb::ResultRecord> recs;
  for (const auto& r : results) recs.push_back(r.record);
  std::cout << adb::render_table1(recs);
  if (o.check && !table1_within_targets(results)) {
    std::cerr << "table1: one or more rows outside tolerance\n";
    return kAuditFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop dissipative entanglement stabilization experiments"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--workers", o.workers, "Worker threads for grid points")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Output directory for CSV/JSON files");
    sub->add_option("--tier", o.tier, "Model tier")->check(CLI::IsMember({"effective", "full", "lab"}));
  };
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", o.config, "Config file")->required();
  add_common(run);
  auto* audit = app.add_subcommand("audit", "Convergence audit (doubled cutoff, halved dt)");
  audit->add_option("config", o.config, "Config file")->required();
  add_common(audit);
  auto* table1 = app.add_subcommand("table1", "Run the TDB, PM, PA and ADB comparison");
  add_common(table1);
  table1->add_flag("--check", o.check, "Exit 4 when a row misses its tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(o);
    if (*audit) return cmd_audit(o);
    if (*table1) return cmd_table1(o);
  } catch (const adb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const adb::ModelError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const adb::IntegratorError& e) {
    std::cerr << "integrator abort: " << e.what() << "\n";
    return kIntegratorAbort;
  } catch (const adb::ControlError& e) {
    std::cerr << "integrator abort: " << e.what() << "\n";
    return kIntegratorAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
