#include "adbsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace adb {

namespace {

constexpr double kDefaultK1 = 1.0;
constexpr double kDefaultK2 = 0.15;

const std::vector<std::string>& spec_keys() {
  static const std::vector<std::string> keys = {"g",     "kappa",   "gamma", "omega0", "omega0_mw",
                                                "delta", "r_p",     "theta_p", "r_e",  "theta_e",
                                                "K1",    "K2",      "fock_cutoff", "delta_c"};
  return keys;
}

bool is_spec_key(const std::string& k) {
  const auto& keys = spec_keys();
  return std::find(keys.begin(), keys.end(), k) != keys.end();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& key) {
  const std::string v = trim(text);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
  if (used != v.size() || !std::isfinite(out)) throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

std::vector<double> parse_values(const std::string& text, const std::string& key) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(parse_number(item, key));
    if (parts.size() != 3) throw ConfigError("key '" + key + "': range must be start:stop:step");
    const double a = parts[0], b = parts[1], h = parts[2];
    if (!(h > 0.0) || b < a) throw ConfigError("key '" + key + "': range needs step > 0 and stop >= start");
    const auto n = static_cast<long>(std::floor((b - a) / h + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * h);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (trim(item).empty()) continue;
      out.push_back(parse_number(item, key));
    }
  }
  if (out.empty()) throw ConfigError("grid axis '" + key + "' is empty");
  return out;
}

void set_axis(std::vector<GridAxis>& grid, GridAxis axis) {
  for (auto& a : grid)
    if (a.key == axis.key) {
      a = std::move(axis);
      return;
    }
  grid.push_back(std::move(axis));
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

std::string coord_label(const std::map<std::string, double>& coords) {
  std::string out;
  for (const auto& [k, v] : coords) {
    std::string name = k.substr(k.find('.') + 1);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    out += "_" + name + buf;
  }
  return out;
}

double default_t_end(Preset p, double r_p, double g_sc) {
  switch (p) {
    case Preset::table1:
    case Preset::fig3: return r_p == 0.0 ? 3000.0 : 1500.0;
    case Preset::fig4_rp_sweep: return std::max(600.0, std::ceil(6000.0 / g_sc));
    case Preset::fig5_contour: return 600.0;
    case Preset::fig6_noise_grid: return 160.0;
    case Preset::fig7_tdb_populations: return 1500.0;
    case Preset::custom: return 1000.0;
  }
  return 1000.0;
}

struct Row {
  std::string name;
  double r_p;
  bool feedback;
};

}  // namespace

// ----------------------------------------------------------------- presets

std::string to_string(Preset p) {
  switch (p) {
    case Preset::table1: return "table1";
    case Preset::fig3: return "fig3";
    case Preset::fig4_rp_sweep: return "fig4_rp_sweep";
    case Preset::fig5_contour: return "fig5_contour";
    case Preset::fig6_noise_grid: return "fig6_noise_grid";
    case Preset::fig7_tdb_populations: return "fig7_tdb_populations";
    case Preset::custom: return "custom";
  }
  return "custom";
}

Preset preset_from_string(const std::string& name) {
  for (Preset p : {Preset::table1, Preset::fig3, Preset::fig4_rp_sweep, Preset::fig5_contour, Preset::fig6_noise_grid,
                   Preset::fig7_tdb_populations, Preset::custom})
    if (to_string(p) == name) return p;
  throw ConfigError("unknown scenario '" + name + "'");
}

// ------------------------------------------------------------------ parser

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::map<std::string, int> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    if (seen[key]++) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");

    if (key == "scenario") {
      cfg.scenario = preset_from_string(value);
    } else if (key == "model.tier") {
      try {
        cfg.tier = tier_from_string(value);
      } catch (const ModelError& e) {
        throw ConfigError(e.what());
      }
    } else if (key.rfind("model.", 0) == 0) {
      const std::string field = key.substr(6);
      if (!is_spec_key(field)) throw ConfigError("unknown model parameter '" + key + "'");
      cfg.model[field] = parse_number(value, key);
    } else if (key.rfind("grid.", 0) == 0) {
      const std::string axis = key.substr(5);
      const bool ok = (axis.rfind("model.", 0) == 0 && is_spec_key(axis.substr(6))) || axis == "noise.lambda" ||
                      axis == "noise.eta";
      if (!ok) throw ConfigError("unknown grid axis '" + axis + "'");
      set_axis(cfg.grid, GridAxis{axis, parse_values(value, key)});
    } else if (key == "integrator.dt") {
      cfg.dt = parse_number(value, key);
    } else if (key == "integrator.t_end") {
      cfg.t_end = parse_number(value, key);
    } else if (key == "integrator.record_interval") {
      cfg.record_interval = parse_number(value, key);
      if (!(cfg.record_interval > 0.0)) throw ConfigError("integrator.record_interval must be > 0");
    } else if (key == "analysis.t_f") {
      cfg.t_f = parse_number(value, key);
    } else if (key == "analysis.v_threshold") {
      cfg.criterion.v_threshold = parse_number(value, key);
    } else if (key == "analysis.vdot_threshold") {
      cfg.criterion.vdot_threshold = parse_number(value, key);
    } else if (key == "noise.lambda") {
      cfg.noise.lambda = parse_number(value, key);
    } else if (key == "noise.eta") {
      cfg.noise.eta = parse_number(value, key);
    } else if (key == "initial_state") {
      if (value != "gg" && value != "ground_mixed") throw ConfigError("initial_state must be gg or ground_mixed");
      cfg.initial_state = value;
    } else if (key == "output.dir") {
      cfg.output_dir = value;
    } else if (key == "seed") {
      const double s = parse_number(value, key);
      if (s < 0.0 || s != std::floor(s)) throw ConfigError("seed must be a non-negative integer");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "audit.t_end") {
      cfg.audit_t_end = parse_number(value, key);
      if (!(cfg.audit_t_end > 0.0)) throw ConfigError("audit.t_end must be > 0");
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  try {
    cfg.noise.validate();
    cfg.criterion.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (cfg.scenario == Preset::table1 && !cfg.grid.empty()) throw ConfigError("table1 takes no grid axes");
  if (cfg.scenario == Preset::custom && cfg.grid.empty()) throw ConfigError("custom scenario needs a non-empty grid");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

// --------------------------------------------------------------- resolving

std::string fingerprint(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunRequest::canonical() const {
  std::ostringstream os;
  os << "label=" << label << "\nscenario=" << to_string(tag) << "\ntier=" << to_string(tier);
  const auto& s = spec;
  os << "\ng=" << fmt(s.g) << "\nkappa=" << fmt(s.kappa) << "\ngamma=" << fmt(s.gamma) << "\nomega0=" << fmt(s.omega0)
     << "\nomega0_mw=" << fmt(s.omega0_mw) << "\ndelta=" << fmt(s.delta) << "\nr_p=" << fmt(s.r_p)
     << "\ntheta_p=" << fmt(s.theta_p) << "\nr_e=" << fmt(s.r_e) << "\ntheta_e=" << fmt(s.theta_e)
     << "\nK1=" << fmt(s.K1) << "\nK2=" << fmt(s.K2) << "\nfock_cutoff=" << s.fock_cutoff
     << "\ndelta_c=" << (s.delta_c ? fmt(*s.delta_c) : "none");
  os << "\ndt=" << fmt(integrator.dt) << "\nt_end=" << fmt(integrator.t_end)
     << "\nrecord_stride=" << integrator.record_stride << "\naudit_stride=" << integrator.audit_stride;
  os << "\nlambda=" << (noise ? fmt(noise->lambda) : "0") << "\neta=" << (noise ? fmt(noise->eta) : "0");
  os << "\nt_f=" << (fixed_tf ? fmt(*fixed_tf) : "t_S") << "\nv_threshold=" << fmt(criterion.v_threshold)
     << "\nvdot_threshold=" << fmt(criterion.vdot_threshold) << "\ninitial_state=" << initial_state << "\n";
  return os.str();
}

std::size_t lab_frame_cutoff(double r_p) {
  for (std::size_t c = 2;; c += 2) {
    try {
      (void)squeezed_vacuum_ket(r_p, c);
      return c + 2;
    } catch (const ModelError&) {
      if (c > 400) throw;
    }
  }
}

ModelSpec resolve_spec(const std::map<std::string, double>& model, ModelTier tier) {
  auto get = [&](const char* k, double dflt) {
    const auto it = model.find(k);
    return it == model.end() ? dflt : it->second;
  };
  ModelSpec s = reference_spec(get("r_p", 0.0), get("K1", 0.0), get("K2", 0.0));
  if (tier == ModelTier::lab_frame) {
    s.fock_cutoff = lab_frame_cutoff(s.r_p);
    s.delta_c = kLabOmegaSc * s.g * std::cosh(2.0 * s.r_p);
  }
  for (const auto& [k, v] : model) {
    if (k == "g") s.g = v;
    else if (k == "kappa") s.kappa = v;
    else if (k == "gamma") s.gamma = v;
    else if (k == "omega0") s.omega0 = v;
    else if (k == "omega0_mw") s.omega0_mw = v;
    else if (k == "delta") s.delta = v;
    else if (k == "theta_p") s.theta_p = v;
    else if (k == "r_e") s.r_e = v;
    else if (k == "theta_e") s.theta_e = v;
    else if (k == "delta_c") s.delta_c = v;
    else if (k == "fock_cutoff") {
      if (v < 1.0 || v != std::floor(v)) throw ConfigError("model.fock_cutoff must be a positive integer");
      s.fock_cutoff = static_cast<std::size_t>(v);
    }
  }
  try {
    s.validate();
  } catch (const ModelError& e) {
    throw ConfigError(e.what());
  }
  return s;
}

double default_dt(const CompiledModel& model, double record_interval) {
  const double dt_max = std::min(0.1, 0.1 / model.fastest_frequency());
  const double n = std::ceil(record_interval / dt_max - 1e-9);
  return record_interval / std::max(n, 1.0);
}

std::vector<RunRequest> expand(const ExperimentConfig& cfg) {
  std::vector<Row> rows;
  std::vector<GridAxis> grid;
  std::optional<double> fixed_tf = cfg.t_f;
  const double rp_user = cfg.model.count("r_p") ? cfg.model.at("r_p") : 2.0;
  switch (cfg.scenario) {
    case Preset::table1:
      rows = {{"tdb", 0.0, false}, {"pm", 0.0, true}, {"pa", rp_user, false}, {"adb", rp_user, true}};
      break;
    case Preset::fig3:
      rows = {{"adb", rp_user, true}, {"tdb", 0.0, false}};
      break;
    case Preset::fig4_rp_sweep:
      rows = {{"pa", 0.0, false}, {"adb", 0.0, true}};
      grid.push_back({"model.r_p", {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}});
      break;
    case Preset::fig5_contour:
      rows = {{"adb", 0.0, true}};
      grid.push_back({"model.r_p", parse_values("0:3:0.25", "grid.model.r_p")});
      break;
    case Preset::fig6_noise_grid:
      rows = {{"adb", rp_user, true}};
      grid.push_back({"noise.lambda", parse_values("0:0.05:0.005", "grid.noise.lambda")});
      grid.push_back({"noise.eta", parse_values("0:0.05:0.005", "grid.noise.eta")});
      if (!fixed_tf) fixed_tf = 160.0;
      break;
    case Preset::fig7_tdb_populations:
      rows = {{"tdb", 0.0, false}};
      break;
    case Preset::custom: {
      const double k1 = cfg.model.count("K1") ? cfg.model.at("K1") : 0.0;
      const double k2 = cfg.model.count("K2") ? cfg.model.at("K2") : 0.0;
      rows = {{"run", cfg.model.count("r_p") ? cfg.model.at("r_p") : 0.0, k1 > 0.0 || k2 > 0.0}};
      break;
    }
  }
  for (const auto& a : cfg.grid) set_axis(grid, a);

  // Cartesian product, last axis fastest.
  std::vector<std::map<std::string, double>> points{{}};
  for (const auto& axis : grid) {
    std::vector<std::map<std::string, double>> next;
    for (const auto& p : points)
      for (double v : axis.values) {
        auto q = p;
        q[axis.key] = v;
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }

  std::vector<RunRequest> out;
  for (const auto& coords : points) {
    for (const auto& row : rows) {
      auto model = cfg.model;
      model["r_p"] = row.r_p;
      if (cfg.scenario != Preset::custom) {
        model["K1"] = row.feedback ? (cfg.model.count("K1") ? cfg.model.at("K1") : kDefaultK1) : 0.0;
        model["K2"] = row.feedback ? (cfg.model.count("K2") ? cfg.model.at("K2") : kDefaultK2) : 0.0;
      }
      NoiseSpec noise = cfg.noise;
      for (const auto& [k, v] : coords) {
        if (k == "noise.lambda") noise.lambda = v;
        else if (k == "noise.eta") noise.eta = v;
        else model[k.substr(6)] = v;
      }
      try {
        noise.validate();
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }

      RunRequest req;
      req.tier = cfg.tier;
      req.spec = resolve_spec(model, cfg.tier);
      req.tag = classify(req.spec.r_p, req.spec.K1, req.spec.K2);
      req.label = row.name + coord_label(coords);
      req.coords = coords;
      req.criterion = cfg.criterion;
      req.initial_state = cfg.initial_state;
      req.fixed_tf = fixed_tf;
      if (noise.lambda != 0.0 || noise.eta != 0.0) req.noise = noise;

      const CompiledModel m = [&] {
        try {
          return build_model(req.tier, req.spec);
        } catch (const std::exception& e) {
          throw ConfigError(std::string("model construction failed: ") + e.what());
        }
      }();
      auto& ic = req.integrator;
      ic.dt = cfg.dt ? *cfg.dt : default_dt(m, cfg.record_interval);
      ic.t_end = cfg.t_end ? *cfg.t_end : default_t_end(cfg.scenario, req.spec.r_p, req.spec.g_sc());
      if (fixed_tf) ic.t_end = std::max(ic.t_end, *fixed_tf);
      ic.record_stride = static_cast<std::size_t>(std::max(1.0, std::round(cfg.record_interval / ic.dt)));
      ic.audit_stride = std::max<std::size_t>(ic.record_stride * 10, 1);
      try {
        ic.validate(m);
      } catch (const IntegratorError& e) {
        throw ConfigError(e.what());
      }
      out.push_back(std::move(req));
    }
  }
  // Labels must be unique; fall back to an index suffix.
  std::map<std::string, int> count;
  for (const auto& r : out) ++count[r.label];
  int idx = 0;
  for (auto& r : out) {
    if (count[r.label] > 1) r.label += "_" + std::to_string(idx);
    ++idx;
  }
  return out;
}

// --------------------------------------------------------------- execution

DensityMatrix initial_state(const CompiledModel& model, const std::string& kind) {
  const auto& b = model.basis;
  if (kind == "gg") return DensityMatrix::pure(b.gg);
  if (kind == "ground_mixed") return DensityMatrix::mixture({b.gg, b.ff, b.T, b.S});
  throw ConfigError("unknown initial state '" + kind + "'");
}

RunOutput execute(const RunRequest& req) {
  const CompiledModel model = build_model(req.tier, req.spec);
  const ControlLaw law = make_control_law(model);
  RunOutput out;
  out.trajectory = integrate_closed_loop(model, law, initial_state(model, req.initial_state), req.integrator, req.noise);
  out.record.label = req.label;
  out.record.fingerprint = fingerprint(req.canonical());
  out.record.summary = summarize(out.trajectory, model, req.tag, req.criterion, req.fixed_tf);
  out.record.coords = req.coords;
  return out;
}

std::vector<RunOutput> run_requests(const std::vector<RunRequest>& reqs, std::size_t workers) {
  std::vector<RunOutput> results(reqs.size());
  std::vector<std::exception_ptr> errors(reqs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < reqs.size(); i = next++) {
      try {
        results[i] = execute(reqs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(reqs.size(), 1));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

namespace {

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  body(f);
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

std::vector<RunOutput> run_scenario(const ExperimentConfig& cfg, std::size_t workers) {
  auto results = run_requests(expand(cfg), workers);
  if (cfg.output_dir.empty()) return results;

  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  std::vector<ResultRecord> records;
  for (auto& r : results) {
    r.record.series_file = r.record.label + ".csv";
    write_file(dir / r.record.series_file, [&](std::ostream& os) { write_timeseries_csv(os, r.trajectory); });
    records.push_back(r.record);
  }
  write_file(dir / "summary.json", [&](std::ostream& os) { os << summary_json(records) << "\n"; });

  if (cfg.scenario == Preset::table1) {
    write_file(dir / "table1.txt", [&](std::ostream& os) { os << render_table1(records); });
  } else if (cfg.scenario == Preset::fig6_noise_grid) {
    write_file(dir / "noise_grid.csv", [&](std::ostream& os) {
      os << "lambda,eta,F\n";
      for (const auto& r : records) {
        const double l = r.coords.count("noise.lambda") ? r.coords.at("noise.lambda") : cfg.noise.lambda;
        const double e = r.coords.count("noise.eta") ? r.coords.at("noise.eta") : cfg.noise.eta;
        os << fmt(l) << ',' << fmt(e) << ',' << fmt(r.summary.fidelity) << '\n';
      }
    });
  } else if (cfg.scenario == Preset::fig5_contour) {
    write_file(dir / "contour_rp.csv", [&](std::ostream& os) {
      os << "r_p,t,P_S\n";
      for (const auto& r : results)
        for (const auto& p : r.trajectory.points)
          os << fmt(r.record.summary.r_p) << ',' << fmt(p.t) << ',' << fmt(p.P_S) << '\n';
    });
  }
  return results;
}

// ----------------------------------------------------------------- schemas

void write_timeseries_csv(std::ostream& os, const Trajectory& traj) {
  os << kTimeseriesHeader << '\n';
  for (const auto& p : traj.points) {
    os << fmt(p.t) << ',' << fmt(p.P_S) << ',' << fmt(p.P_T) << ',' << fmt(p.P_gg) << ',' << fmt(p.P_ff) << ','
       << fmt(p.P_D) << ',' << fmt(p.controls.xi1) << ',' << fmt(p.controls.xi2) << ',' << fmt(p.v.S) << ','
       << fmt(p.fidelity) << '\n';
  }
}

std::vector<TimeseriesRow> read_timeseries_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != kTimeseriesHeader) throw ConfigError("time series: header mismatch");
  std::vector<TimeseriesRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(parse_number(cell, "row " + std::to_string(lineno)));
    if (v.size() != 10) throw ConfigError("time series row " + std::to_string(lineno) + ": expected 10 columns");
    TimeseriesRow r{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]};
    if (!rows.empty() && !(r.t > rows.back().t))
      throw ConfigError("time series row " + std::to_string(lineno) + ": times not increasing");
    for (double p : {r.P_S, r.P_T, r.P_gg, r.P_ff, r.P_D, r.F})
      if (p < 0.0 || p > 1.0) throw ConfigError("time series row " + std::to_string(lineno) + ": value outside [0, 1]");
    rows.push_back(r);
  }
  return rows;
}

std::string summary_json(const std::vector<ResultRecord>& records) {
  using nlohmann::ordered_json;
  ordered_json arr = ordered_json::array();
  for (const auto& r : records) {
    const auto& s = r.summary;
    ordered_json o;
    o["label"] = r.label;
    o["fingerprint"] = r.fingerprint;
    o["scenario"] = to_string(s.scenario);
    o["tier"] = s.tier;
    o["r_p"] = s.r_p;
    o["g_sc"] = s.g_sc;
    o["fidelity"] = s.fidelity;
    o["t_f"] = s.t_f;
    o["t_S"] = s.t_S ? ordered_json(*s.t_S) : ordered_json(nullptr);
    o["T"] = s.T ? ordered_json(*s.T) : ordered_json(nullptr);
    ordered_json pops = ordered_json::object();
    for (const auto& [k, v] : s.final_populations) pops[k] = v;
    o["final_populations"] = pops;
    ordered_json coords = ordered_json::object();
    for (const auto& [k, v] : r.coords) coords[k] = v;
    o["coords"] = coords;
    o["series_file"] = r.series_file;
    o["warnings"] = s.warnings;
    arr.push_back(std::move(o));
  }
  return arr.dump(2);
}

const std::vector<Table1Target>& table1_targets() {
  static const std::vector<Table1Target> t = {
      {ScenarioTag::TDB, 1500.0, 0.20, 0.96, 0.015},
      {ScenarioTag::PM, 570.0, 0.20, 0.95, 0.015},
      {ScenarioTag::PA, 400.0, 0.20, 0.987, 0.01},
      {ScenarioTag::ADB, 160.0, 0.20, 0.986, 0.01},
  };
  return t;
}

std::string render_table1(const std::vector<ResultRecord>& records) {
  std::ostringstream os;
  os << std::left << std::setw(6) << "row" << std::setw(14) << "tier" << std::right << std::setw(10) << "t_S[1/g]"
     << std::setw(10) << "target" << std::setw(9) << "F" << std::setw(9) << "target" << std::setw(10) << "C_sc/C"
     << "\n";
  for (const auto& tgt : table1_targets()) {
    for (const auto& r : records) {
      const auto& s = r.summary;
      if (s.scenario != tgt.tag) continue;
      char ts[32];
      if (s.t_S) std::snprintf(ts, sizeof ts, "%.0f", *s.t_S);
      else std::snprintf(ts, sizeof ts, "none");
      char line[256];
      std::snprintf(line, sizeof line, "%-6s%-14s%10s%10.0f%9.4f%9.3f%10.2f\n", to_string(s.scenario).c_str(),
                    s.tier.c_str(), ts, tgt.t_S, s.fidelity, tgt.F, std::cosh(s.r_p) * std::cosh(s.r_p));
      os << line;
    }
  }
  return os.str();
}

// ------------------------------------------------------------- convergence

ConvergenceReport convergence_audit(const ExperimentConfig& cfg) {
  if (cfg.tier == ModelTier::effective) throw ConfigError("convergence audit needs the full or lab tier (no cutoff axis)");
  auto reqs = expand(cfg);
  if (reqs.empty()) throw ConfigError("config expands to no runs");
  RunRequest base = reqs.front();
  base.integrator.t_end = std::min(base.integrator.t_end, cfg.audit_t_end);
  base.fixed_tf.reset();

  auto p_s = [](const RunRequest& r) {
    const auto out = execute(r);
    std::vector<std::pair<double, double>> v;
    for (const auto& p : out.trajectory.points) v.emplace_back(p.t, p.P_S);
    return v;
  };
  auto max_diff = [](const auto& a, const auto& b) {
    if (a.size() != b.size()) throw std::logic_error("convergence audit: record grids differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i].second - b[i].second));
    return m;
  };
  auto halve = [](RunRequest r) {
    r.integrator.dt *= 0.5;
    r.integrator.record_stride *= 2;
    r.integrator.audit_stride *= 2;
    return r;
  };

  const auto ref = p_s(base);
  RunRequest big = base;
  big.spec.fock_cutoff *= 2;
  const auto h = halve(base);
  const auto q = halve(h);
  const auto ps_h = p_s(h);

  ConvergenceReport rep;
  rep.label = base.label;
  rep.max_dP_cutoff = max_diff(ref, p_s(big));
  rep.max_dP_dt = max_diff(ref, ps_h);
  const double fine = max_diff(ps_h, p_s(q));
  rep.dt_ratio = fine > 0.0 ? rep.max_dP_dt / fine : 0.0;
  rep.cutoff_ok = rep.max_dP_cutoff <= 1e-3;
  rep.dt_ok = rep.max_dP_dt <= 1e-6;
  return rep;
}

}  // namespace adb
