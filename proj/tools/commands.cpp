#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#include "vlab/experiments.hpp"
#include "vlab/parallel.hpp"
#include "vlab/snapshot.hpp"
#include "vlab/spectral_lab.hpp"

#ifndef VLAB_VERSION
#define VLAB_VERSION "unknown"
#endif

namespace vlab::cli {
namespace {

using json = nlohmann::json;

json parse_json(const std::string& text, const std::string& what) {
  try {
    json j = json::parse(text);
    require(j.is_object(), what + ": expected a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw InvalidInput(what + ": " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw InvalidInput(where + ": unknown key '" + k + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

template <class T>
T get_required(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw InvalidInput(where + ": missing '" + key + "'");
  return j.at(key).get<T>();
}

VortexConfiguration read_vortices(const json& j, const std::string& where) {
  std::vector<Vec2> z;
  for (const auto& p : get_required<json>(j, "positions", where)) {
    require(p.is_array() && p.size() == 2, where + ": positions are [x, y] pairs");
    z.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return VortexConfiguration(std::move(z), get_required<std::vector<double>>(j, "circulations", where));
}

void write_json(const std::filesystem::path& file, const json& j) {
  std::ofstream f(file);
  if (!f) throw std::runtime_error("cannot open " + file.string());
  f << j.dump(2) << '\n';
}

json manifest(const std::string& command, const std::string& source) {
  return {{"command", command},
          {"config", source.empty() ? json::object() : json::parse(source)},
          {"version", VLAB_VERSION},
          {"threads", thread_count()}};
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string read_text(const std::filesystem::path& file) {
  std::ifstream f(file);
  if (!f) throw InvalidInput("cannot open " + file.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

SimulateConfig parse_simulate_config(const std::string& json_text, const std::filesystem::path& base) {
  const std::string where = "simulate config";
  const json j = parse_json(json_text, where);
  reject_unknown(j,
                 {"grid", "nu", "t0", "t_end", "dt", "dt_proportional", "dealias", "cfl_limit",
                  "energy_d", "diagnostics_every", "initial", "snapshots", "output"},
                 where);
  SimulateConfig cfg;
  cfg.source = json_text;
  try {
    const json g = get_required<json>(j, "grid", where);
    reject_unknown(g, {"n_points", "box_length"}, where + ".grid");
    SolverConfig& s = cfg.solver;
    s.grid = GridSpec(get_required<int>(g, "n_points", where), get_required<double>(g, "box_length", where));
    s.nu = get_required<double>(j, "nu", where);
    s.t0 = get_or(j, "t0", 0.0);
    s.t_end = get_required<double>(j, "t_end", where);
    s.dt = get_required<double>(j, "dt", where);
    s.dt_proportional = get_or(j, "dt_proportional", false);
    s.dealias = get_or(j, "dealias", true);
    s.cfl_limit = get_or(j, "cfl_limit", 0.5);
    s.energy_d = get_or(j, "energy_d", 1.0);
    s.diagnostics_every = get_or(j, "diagnostics_every", 0);
    if (j.contains("snapshots")) {
      const json& sn = j.at("snapshots");
      reject_unknown(sn, {"every", "times"}, where + ".snapshots");
      s.snapshot_every = get_or(sn, "every", 0);
      s.snapshot_times = get_or(sn, "times", std::vector<double>{});
    }
    const json ini = get_required<json>(j, "initial", where);
    const auto type = get_required<std::string>(ini, "type", where + ".initial");
    if (type == "point_vortices") {
      reject_unknown(ini, {"type", "positions", "circulations"}, where + ".initial");
      cfg.initial = read_vortices(ini, where + ".initial");
    } else if (type == "field") {
      reject_unknown(ini, {"type", "path"}, where + ".initial");
      std::filesystem::path p = get_required<std::string>(ini, "path", where + ".initial");
      if (p.is_relative() && !base.empty()) p = base / p;
      LoadedField lf = read_field(p);
      require(lf.field.grid().n_points == s.grid.n_points &&
                  lf.field.grid().box_length == s.grid.box_length,
              where + ": initial field grid differs from the configured grid");
      cfg.initial = std::move(lf.field);
    } else {
      throw InvalidInput(where + ".initial: unknown type '" + type + "'");
    }
    cfg.output = get_or<std::string>(j, "output", cfg.output.string());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(where + ": " + e.what());
  }
  cfg.solver.validate();
  return cfg;
}

PointVortexConfig parse_pointvortex_config(const std::string& json_text) {
  const std::string where = "pointvortex config";
  const json j = parse_json(json_text, where);
  reject_unknown(j,
                 {"rhs", "nu", "box_length", "positions", "circulations", "t_start", "t_end", "dt",
                  "record_every", "output"},
                 where);
  PointVortexConfig cfg;
  cfg.source = json_text;
  try {
    const auto kind = get_or<std::string>(j, "rhs", "pw");
    if (kind == "pw") {
      cfg.rhs = Rhs::pw();
    } else if (kind == "pw2") {
      cfg.rhs = Rhs::pw2(get_required<double>(j, "nu", where));
      require(cfg.rhs.nu > 0.0, where + ": pw2 needs nu > 0");
    } else if (kind == "periodic") {
      cfg.rhs = Rhs::periodic(get_required<double>(j, "box_length", where));
      require(cfg.rhs.box_length > 0.0, where + ": periodic needs box_length > 0");
    } else {
      throw InvalidInput(where + ": unknown rhs '" + kind + "'");
    }
    cfg.initial = read_vortices(j, where);
    cfg.t_start = get_or(j, "t_start", 0.0);
    cfg.t_end = get_required<double>(j, "t_end", where);
    cfg.dt = get_required<double>(j, "dt", where);
    cfg.record_every = get_or(j, "record_every", 1);
    cfg.output = get_or<std::string>(j, "output", cfg.output.string());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(where + ": " + e.what());
  }
  require(cfg.t_end > cfg.t_start, where + ": need t_end > t_start");
  require(cfg.dt > 0.0 && cfg.record_every >= 1, where + ": need dt > 0 and record_every >= 1");
  return cfg;
}

std::vector<double> parse_alpha_grid(const std::string& spec) {
  const std::string where = "alpha grid '" + spec + "'";
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == s.size() && std::isfinite(v), where + ": bad number '" + s + "'");
    return v;
  };
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, spec.find(':') != std::string::npos ? ':' : ',');)
    parts.push_back(item);
  if (!parts.empty() && (parts[0] == "lin" || parts[0] == "log")) {
    require(parts.size() == 4, where + ": expected lin|log:a:b:count");
    const double a = number(parts[1]), b = number(parts[2]);
    const int count = static_cast<int>(number(parts[3]));
    require(count >= 2, where + ": count must be >= 2");
    const bool lg = parts[0] == "log";
    require(!lg || (a > 0.0 && b > 0.0), where + ": log grid needs positive bounds");
    std::vector<double> out;
    for (int k = 0; k < count; ++k) {
      const double s = static_cast<double>(k) / (count - 1);
      out.push_back(lg ? std::exp(std::log(a) + s * (std::log(b) - std::log(a))) : a + s * (b - a));
    }
    return out;
  }
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(number(p));
  require(!out.empty(), where + ": empty");
  return out;
}

int simulate(const SimulateConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(cfg.output / "fields");
  json m = manifest("simulate", cfg.source);
  const RunResult r = run(cfg.solver, cfg.initial);
  for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(4) << std::setfill('0') << k << "." << field_format;
    write_field(cfg.output / "fields" / name.str(), r.snapshots[k].w, {r.snapshots[k].t, cfg.solver.nu});
  }
  write_diagnostics(r.diagnostics, cfg.output / "diagnostics.csv");
  m["steps"] = r.steps;
  m["snapshots"] = r.snapshots.size();
  m["aborted"] = r.aborted;
  if (r.aborted) m["abort_reason"] = r.abort_reason;
  m["wall_seconds"] = seconds_since(start);
  write_json(cfg.output / "manifest.json", m);
  log << "simulate: " << r.steps << " steps, " << r.snapshots.size() << " snapshots -> "
      << cfg.output.string() << "\n";
  if (r.aborted) {
    log << "simulate: aborted: " << r.abort_reason << "\n";
    return 1;
  }
  return 0;
}

int pointvortex(const PointVortexConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(cfg.output);
  const Trajectory t = integrate(cfg.rhs, cfg.initial, cfg.t_start, cfg.t_end, cfg.dt, cfg.record_every);
  write_trajectory(t, cfg.output / "trajectory");
  json m = manifest("pointvortex", cfg.source);
  const FirstIntegrals f0 = first_integrals(t.states.front());
  const FirstIntegrals f1 = first_integrals(t.states.back());
  m["first_integrals"] = {{"H", {f0.H, f1.H}}, {"Mx", {f0.M.x, f1.M.x}}, {"My", {f0.M.y, f1.M.y}},
                          {"I", {f0.I, f1.I}}};
  const bool collided = t.status == TrajectoryStatus::CollisionTerminated;
  m["status"] = collided ? "collision-terminated" : "completed";
  m["wall_seconds"] = seconds_since(start);
  write_json(cfg.output / "manifest.json", m);
  log << "pointvortex: " << t.times.size() << " states (" << m["status"].get<std::string>() << ") -> "
      << cfg.output.string() << "\n";
  return collided ? 1 : 0;
}

int spectrum(int n, double alpha, int basis_size, std::size_t count, std::ostream& csv) {
  require(n >= 0, "spectrum: mode must be >= 0");
  ModeDiscretization disc;
  disc.basis_size = basis_size;
  const ModeOperator op = build_mode_operator(n, alpha, disc);
  csv << "re,im\n" << std::setprecision(17);
  for (const auto& v : mode_spectrum(op, count == 0 ? static_cast<std::size_t>(basis_size) : count))
    csv << v.real() << "," << v.imag() << "\n";
  return 0;
}

int bounds(const std::vector<double>& alphas, int basis_size, int n_max,
           const std::filesystem::path& out, std::ostream& log) {
  ModeDiscretization disc;
  disc.basis_size = basis_size;
  BoundsOptions opts;
  opts.n_max = n_max;
  const BoundsReport r = bounds_sweep(alphas, disc, opts);
  std::filesystem::create_directories(out);
  write_bounds(r, out / "bounds");
  log << std::setprecision(6);
  for (const auto& row : r.rows)
    log << "alpha " << row.alpha << ": Sigma " << row.Sigma << ", Psi " << row.Psi
        << (row.range_flag ? " (lambda range flagged)" : "") << "\n";
  log << "bounds -> " << (out / "bounds").string() << ".{json,csv}\n";
  return 0;
}

int experiment(const std::filesystem::path& config, const std::filesystem::path& out_override,
               std::ostream& log) {
  ExperimentConfig cfg = load_experiment_config(config);
  if (!out_override.empty()) cfg.output = out_override;
  const ExperimentReport r = run_experiment(cfg);
  for (const auto& c : r.checks)
    log << (c.pass ? "PASS " : "FAIL ") << c.criterion << " " << c.clause << " (value "
        << c.value << ", tolerance " << c.tolerance << ")\n";
  for (const auto& w : r.warnings) log << "warning: " << w << "\n";
  log << to_string(r.id) << ": " << (r.passed() ? "passed" : "failed") << " in " << r.wall_seconds
      << " s -> " << cfg.output.string() << "\n";
  return r.passed() ? 0 : 1;
}

}  // namespace vlab::cli
