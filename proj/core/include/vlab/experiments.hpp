#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vlab/fit.hpp"
#include "vlab/point_vortex.hpp"
#include "vlab/radial.hpp"
#include "vlab/solver.hpp"

namespace vlab {

enum class ExperimentId {
  OseenConvergence,   // E1-oseen-convergence
  PerturbationDecay,  // E2-perturbation-decay
  Theorem4Scaling,    // E3-theorem4-scaling
  Deformation,        // E4-deformation
  BoundsSweep,        // E5-bounds-sweep
};

std::string to_string(ExperimentId id);
ExperimentId parse_experiment_id(std::string_view name);

// E1: omega_0 = alpha G (1 + bump p) with p = Re((xi_1 + i xi_2)^m) e^{-|xi|^2/4},
// normalized to max |p| = 1 so that omega_0 stays positive. Viscosity nu and
// frame t0 = T = 1; entropy diagnostics run on every step.
struct ConvergenceParams {
  int n_points = 512;
  double box_length = 128.0;
  double nu = 1.0;
  double alpha = 1.0;
  double bump = 0.05;
  int bump_mode = 3;
  double tau_end = 3.0;
  int samples = 12;
  double dt = 0.02;  // proportional to t
  void validate() const;
};

// E2: omega_0 = alpha G + w_0, w_0 projected into X_1 (dominated by Delta G) or
// into X_0 with nonzero first moments (dominated by grad G), scaled to
// ||w_0||_X = size. `mix` weighs the seeded second-order Hermite admixture.
struct PerturbationParams {
  int n_points = 512;
  double box_length = 256.0;
  double nu = 1.0;
  std::vector<double> alphas{1.0, 4.0};
  double size = 0.01;
  double mix = 0.05;
  double tau_end = 4.0;
  int samples = 16;
  double dt = 0.02;  // proportional to t
  double xi_radius = 8.0;  // X norm evaluated on |xi| <= xi_radius
  void validate() const;
};

// E3 and E4: identical co-rotating pair at separation d, each of circulation
// `gamma`, started as Oseen vortices of age t0 = nu_t0 d^2 / nu and run for
// `span` turnover times T0 = d^2 / (2 gamma) on the periodic box.
struct PairParams {
  int n_points = 256;
  double box_length = 3.0;
  double d = 1.0;
  double gamma = 4.0;
  std::vector<double> nus{1e-3, 2e-3, 4e-3};
  double nu_t0 = 3e-4;
  double span = 2.0;
  int samples = 4;
  double dt = 2.5e-4;
  double pv_steps_per_T0 = 1000.0;  // point-vortex RK4 resolution
  double extraction_radius = 8.0;   // |xi| range of the angular analysis (E4)
  double fit_radius = 6.0;          // |xi| range of phase and shape fits (E4)
  int angles = 64;
  void validate() const;
  double turnover_time() const { return d * d / (2.0 * gamma); }
};

struct BoundsParams {
  std::vector<double> alphas{0.0, 2.0, 8.0, 32.0, 128.0, 512.0};
  int basis_size = 96;
  int n_max = 8;
  int lambda_count = 201;
  double lambda_range = 0.0;
  void validate() const;
};

struct ExperimentConfig {
  ExperimentId id = ExperimentId::OseenConvergence;
  std::filesystem::path output = "out";
  std::uint64_t seed = 1;
  ConvergenceParams convergence;
  PerturbationParams perturbation;
  PairParams pair;
  BoundsParams bounds;

  // Defaults of the given experiment (E4 uses a finer, stronger pair than E3).
  static ExperimentConfig defaults(ExperimentId id);
  // Validates the block the experiment uses; throws InvalidInput.
  void validate() const;
};

// JSON: {"experiment": "E3-theorem4-scaling", "output": "...", "seed": 1,
//        "pair": {"nus": [...], ...}}. Missing keys keep the experiment's defaults;
// unknown keys are rejected.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& file);
std::string config_to_json(const ExperimentConfig& cfg);

struct Check {
  std::string criterion;  // acceptance criterion, e.g. "C9"
  std::string clause;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct NamedFit {
  std::string name;
  ScalingFit fit;
};

struct ExperimentReport {
  ExperimentId id = ExperimentId::OseenConvergence;
  std::vector<Check> checks;
  std::vector<NamedFit> fits;
  std::map<std::string, double> metrics;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> files;  // relative to the output directory
  double wall_seconds = 0.0;
  bool passed() const;
};

// A failing pipeline stage; outputs written before the failure are kept and
// report.json records the stage.
class ExperimentFailure : public std::runtime_error {
 public:
  ExperimentFailure(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage(std::move(stage)) {}
  std::string stage;
};

// Runs the pipeline and writes manifest.json, series/*.csv,
// fields/*.vlab-field-v1 and report.json under cfg.output.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Trajectory recorded exactly at `times` (sorted, the first is the start).
Trajectory trajectory_at(const Rhs& rhs, const VortexConfiguration& c0,
                         const std::vector<double>& times, double dt);

// e(t) = ||omega - superposition(c(t), nu, t)||_{L^1} / sum |gamma_i| at every
// snapshot. Each snapshot time must be a trajectory time.
std::vector<double> theorem4_error(const std::vector<Snapshot>& snapshots, const Trajectory& traj,
                                   double nu);

// Mode-2 analysis of a snapshot near vortex i in the per-vortex variables
// xi = (x - z_i) / sqrt(nu t), w = nu t omega / gamma_i, after the Oseen fields
// of the other vortices are subtracted.
struct DeformationExtraction {
  RadialModeProfile profile;  // a(r) with w_2 = Re(a(r) e^{2 i theta})
  double phase = 0.0;         // best-fit constant orientation in (-pi/2, pi/2]
  double amplitude_max = 0.0;
  double r_at_max = 0.0;
  // sum_j |gamma_j / gamma_i| exp(-|z_ij|^2 / (4 nu t)): the other vortices'
  // Gaussian tails at z_i relative to the local peak.
  double contamination = 0.0;
  std::size_t outside = 0;
  std::vector<std::string> warnings;
};

// `radii` sets the sample circles; the phase is fitted on r <= fit_radius.
DeformationExtraction deformation_extract(const Snapshot& snapshot, std::size_t i,
                                          const VortexConfiguration& c, double nu,
                                          std::shared_ptr<const RadialGrid> radii,
                                          double fit_radius = 6.0, int angles = 64);

// Cosine similarity in L^2(r dr) on r <= r_max between Re(a e^{2 i phase}) and
// the real profile b (evaluated on a's nodes).
double profile_cosine(const RadialModeProfile& a, double phase, const RadialModeProfile& b,
                      double r_max);

}  // namespace vlab
