#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vlab/types.hpp"

namespace vlab {

struct VortexConfiguration {
  std::vector<Vec2> positions;
  std::vector<double> circulations;

  VortexConfiguration() = default;
  // Rejects zero circulations, coincident positions and size mismatches.
  VortexConfiguration(std::vector<Vec2> z, std::vector<double> gamma);

  std::size_t size() const { return positions.size(); }
  double total_circulation() const;
  double total_abs_circulation() const;
  // Infinity for a single vortex.
  double min_distance() const;
};

// PW: Helmholtz-Kirchhoff. PW2: Oseen-regularized kernel at viscosity nu.
// PWPeriodic: point vortices on the square torus of side box_length (Ewald sums),
// the kernel seen by the periodic solver.
struct Rhs {
  enum class Kind { PW, PW2, PWPeriodic };
  Kind kind = Kind::PW;
  double nu = 0.0;
  double box_length = 0.0;

  static Rhs pw() { return {Kind::PW, 0.0, 0.0}; }
  static Rhs pw2(double nu) { return {Kind::PW2, nu, 0.0}; }
  static Rhs periodic(double L) { return {Kind::PWPeriodic, 0.0, L}; }
  std::string name() const;
};

enum class TrajectoryStatus { Completed, CollisionTerminated };

struct Trajectory {
  std::vector<double> times;
  std::vector<VortexConfiguration> states;
  double dt = 0.0;
  std::string method = "rk4";
  Rhs rhs;
  TrajectoryStatus status = TrajectoryStatus::Completed;

  // State at time t, re-integrated from the last recorded state not after t.
  VortexConfiguration state_at(double t) const;
};

std::vector<Vec2> pw_velocity(const VortexConfiguration& c);
std::vector<Vec2> pw2_velocity(const VortexConfiguration& c, double nu, double t);
std::vector<Vec2> periodic_pw_velocity(const VortexConfiguration& c, double L);
std::vector<Vec2> velocity(const Rhs& rhs, const VortexConfiguration& c, double t);

// Classical RK4 with fixed step dt (the final step is shortened to land on t_end).
// Every `record_every`-th state is stored, plus the final one.
Trajectory integrate(const Rhs& rhs, const VortexConfiguration& c0, double t_start, double t_end,
                     double dt, int record_every = 1);

struct FirstIntegrals {
  double H = 0.0;  // -(1/4pi) sum_{i != j} g_i g_j log|z_i - z_j|
  Vec2 M{};        // sum g_i z_i
  double I = 0.0;  // sum g_i |z_i|^2
};

FirstIntegrals first_integrals(const VortexConfiguration& c);

struct Geometry {
  double d = 0.0;   // minimal pairwise distance over the trajectory
  double T0 = 0.0;  // d^2 / sum |g_i|
};

// Throws for a single vortex (d undefined) and for collision-terminated runs.
Geometry geometry(const Trajectory& traj);

// Writes <stem>.csv ("t,z1x,z1y,...") and <stem>.json (circulations, rhs, dt, status).
void write_trajectory(const Trajectory& traj, const std::filesystem::path& stem);

}  // namespace vlab
