#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vlab/point_vortex.hpp"
#include "vlab/solver.hpp"

namespace vlab::cli {

// `vlab simulate` config (JSON):
//   {"grid": {"n_points": 256, "box_length": 40}, "nu": 0.01, "t0": 0.05,
//    "t_end": 1, "dt": 0.005, "dt_proportional": false, "dealias": true,
//    "cfl_limit": 0.5, "energy_d": 1, "diagnostics_every": 0,
//    "initial": {"type": "point_vortices", "positions": [[0, 0]], "circulations": [1]}
//            or {"type": "field", "path": "w.vlab-field-v1"},
//    "snapshots": {"every": 100} or {"times": [0.5, 1]},
//    "output": "out/simulate"}
struct SimulateConfig {
  SolverConfig solver;
  InitialData initial;
  std::filesystem::path output = "out/simulate";
  std::string source;  // config text, echoed into the manifest
};

SimulateConfig parse_simulate_config(const std::string& json_text,
                                     const std::filesystem::path& base = {});

// `vlab pointvortex` config (JSON):
//   {"rhs": "pw" | "pw2" | "periodic", "nu": 0, "box_length": 0,
//    "positions": [[-0.5, 0], [0.5, 0]], "circulations": [1, 1],
//    "t_start": 0, "t_end": 1, "dt": 1e-3, "record_every": 1,
//    "output": "out/pointvortex"}
struct PointVortexConfig {
  Rhs rhs;
  VortexConfiguration initial;
  double t_start = 0.0;
  double t_end = 0.0;
  double dt = 0.0;
  int record_every = 1;
  std::filesystem::path output = "out/pointvortex";
  std::string source;
};

PointVortexConfig parse_pointvortex_config(const std::string& json_text);

// "0,2,8" (explicit list), "lin:a:b:count" or "log:a:b:count".
std::vector<double> parse_alpha_grid(const std::string& spec);

std::string read_text(const std::filesystem::path& file);

// Each command returns the process exit code.
int simulate(const SimulateConfig& cfg, std::ostream& log);
int pointvortex(const PointVortexConfig& cfg, std::ostream& log);
int spectrum(int n, double alpha, int basis_size, std::size_t count, std::ostream& csv);
int bounds(const std::vector<double>& alphas, int basis_size, int n_max,
           const std::filesystem::path& out, std::ostream& log);
int experiment(const std::filesystem::path& config, const std::filesystem::path& out_override,
               std::ostream& log);

}  // namespace vlab::cli
