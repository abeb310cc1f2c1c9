#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vlab/grid.hpp"
#include "vlab/point_vortex.hpp"

namespace vlab {

struct SolverConfig {
  GridSpec grid;
  double nu = 0.0;
  double dt = 0.0;
  double t0 = 0.0;  // initial time; point-vortex data start as Oseen vortices of this age
  double t_end = 0.0;
  bool dealias = true;
  // Step size dt * t / t0 instead of a constant dt.
  bool dt_proportional = false;
  // Snapshots are taken at these times (steps are shortened to land on them),
  // otherwise every `snapshot_every` steps; the final state is always kept.
  std::vector<double> snapshot_times;
  int snapshot_every = 0;
  // Extra diagnostics rows every this many steps (0: snapshots only).
  int diagnostics_every = 0;
  double energy_d = 1.0;  // d in the pseudo-energy E_d
  double cfl_limit = 0.5;

  void validate() const;
};

// Advective CFL breach: dt max|u| / h above the configured limit.
class CflViolation : public NumericalFailure {
 public:
  CflViolation(double max_u, double cfl)
      : NumericalFailure("CFL violated: max|u| = " + std::to_string(max_u) +
                         ", dt max|u| / h = " + std::to_string(cfl)),
        max_u(max_u),
        cfl(cfl) {}
  double max_u;
  double cfl;
};

// One integrating-factor RK4 step of w_t + div(u w) = nu Delta w.
ScalarField2D step(const ScalarField2D& w, double dt, double nu, bool dealias = true,
                   double cfl_limit = 0.5);

// Exact heat step: multiply by exp(-nu |k|^2 dt).
ScalarField2D heat_step(const ScalarField2D& w, double dt, double nu);

struct Diagnostics {
  double t = 0.0;
  double gamma = 0.0;
  Vec2 m1{};
  double m2 = 0.0;
  double L1 = 0.0, L2 = 0.0, Linf = 0.0;
  double energy = 0.0;  // E_d
  double cfl = 0.0;     // dt max|u| / h of the step that produced this state
};

Diagnostics diagnose(const ScalarField2D& w, double t, double energy_d, double cfl);

struct Snapshot {
  double t = 0.0;
  ScalarField2D w;
};

struct RunResult {
  std::vector<Snapshot> snapshots;
  std::vector<Diagnostics> diagnostics;
  std::size_t steps = 0;
  bool aborted = false;
  std::string abort_reason;
};

using InitialData = std::variant<ScalarField2D, VortexConfiguration>;

// Invoked after every step with the new time and state.
using StepObserver = std::function<void(double, const ScalarField2D&)>;

RunResult run(const SolverConfig& cfg, const InitialData& initial, StepObserver observer = {});

// Writes diagnostics.csv (t,gamma,m1x,m1y,m2,L1,L2,Linf,E_d,cfl).
void write_diagnostics(const std::vector<Diagnostics>& rows, const std::filesystem::path& file);

}  // namespace vlab
