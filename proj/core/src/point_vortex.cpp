#include "vlab/point_vortex.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <nlohmann/json.hpp>

#include "vlab/analytics.hpp"

namespace vlab {

VortexConfiguration::VortexConfiguration(std::vector<Vec2> z, std::vector<double> gamma)
    : positions(std::move(z)), circulations(std::move(gamma)) {
  require(!positions.empty(), "VortexConfiguration: need at least one vortex");
  require(positions.size() == circulations.size(),
          "VortexConfiguration: positions and circulations differ in length");
  for (double g : circulations)
    require(g != 0.0 && std::isfinite(g), "VortexConfiguration: circulations must be nonzero");
  require(min_distance() > 0.0, "VortexConfiguration: coincident positions");
}

double VortexConfiguration::total_circulation() const {
  double s = 0.0;
  for (double g : circulations) s += g;
  return s;
}

double VortexConfiguration::total_abs_circulation() const {
  double s = 0.0;
  for (double g : circulations) s += std::abs(g);
  return s;
}

double VortexConfiguration::min_distance() const {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t j = i + 1; j < positions.size(); ++j)
      d = std::min(d, norm(positions[i] - positions[j]));
  return d;
}

std::string Rhs::name() const {
  switch (kind) {
    case Kind::PW: return "PW";
    case Kind::PW2: return "PW2";
    case Kind::PWPeriodic: return "PW-periodic";
  }
  return "?";
}

namespace {

void check_distinct(const VortexConfiguration& c) {
  if (c.size() > 1 && !(c.min_distance() > 0.0))
    throw InvalidInput("point vortices: coincident positions (collision)");
}

// -grad G_box(x) for the zero-mean periodic Green's function, Ewald split with
// a = L^2/(4 pi). The singular n = 0 image is included.
Vec2 periodic_kernel(Vec2 x, double L) {
  x.x -= L * std::round(x.x / L);
  x.y -= L * std::round(x.y / L);
  const double a = L * L / (4.0 * pi);
  Vec2 out{};
  constexpr int NR = 4;
  for (int p = -NR; p <= NR; ++p)
    for (int q = -NR; q <= NR; ++q) {
      const Vec2 y{x.x + p * L, x.y + q * L};
      const double r2 = norm2(y);
      out += (std::exp(-r2 / (4.0 * a)) / (2.0 * pi * r2)) * y;
    }
  constexpr int NK = 6;
  const double kk = 2.0 * pi / L;
  for (int p = -NK; p <= NK; ++p)
    for (int q = -NK; q <= NK; ++q) {
      if (p == 0 && q == 0) continue;
      const Vec2 k{kk * p, kk * q};
      const double k2 = norm2(k);
      out += (std::sin(dot(k, x)) * std::exp(-a * k2) / (k2 * L * L)) * k;
    }
  return out;
}

}  // namespace

std::vector<Vec2> pw_velocity(const VortexConfiguration& c) {
  check_distinct(c);
  std::vector<Vec2> u(c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (i == j) continue;
      const Vec2 z = c.positions[i] - c.positions[j];
      u[i] += (c.circulations[j] / (2.0 * pi * norm2(z))) * perp(z);
    }
  return u;
}

std::vector<Vec2> pw2_velocity(const VortexConfiguration& c, double nu, double t) {
  require(nu > 0.0, "pw2_velocity: nu must be positive");
  require(t > 0.0, "pw2_velocity: t must be positive");
  const double s = std::sqrt(nu * t);
  std::vector<Vec2> u(c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (i == j) continue;
      const Vec2 z = c.positions[i] - c.positions[j];
      u[i] += (c.circulations[j] / s) * gaussian_profile(z / s).vG;
    }
  return u;
}

std::vector<Vec2> periodic_pw_velocity(const VortexConfiguration& c, double L) {
  require(L > 0.0, "periodic_pw_velocity: box length must be positive");
  check_distinct(c);
  std::vector<Vec2> u(c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (i == j) continue;
      u[i] += c.circulations[j] * perp(periodic_kernel(c.positions[i] - c.positions[j], L));
    }
  return u;
}

std::vector<Vec2> velocity(const Rhs& rhs, const VortexConfiguration& c, double t) {
  switch (rhs.kind) {
    case Rhs::Kind::PW: return pw_velocity(c);
    case Rhs::Kind::PW2: return pw2_velocity(c, rhs.nu, t);
    case Rhs::Kind::PWPeriodic: return periodic_pw_velocity(c, rhs.box_length);
  }
  return {};
}

namespace {

VortexConfiguration shifted(const VortexConfiguration& c, const std::vector<Vec2>& k, double s) {
  VortexConfiguration out = c;
  for (std::size_t i = 0; i < c.size(); ++i) out.positions[i] += s * k[i];
  return out;
}

VortexConfiguration rk4_step(const Rhs& rhs, const VortexConfiguration& c, double t, double dt) {
  auto k1 = velocity(rhs, c, t);
  auto k2 = velocity(rhs, shifted(c, k1, 0.5 * dt), t + 0.5 * dt);
  auto k3 = velocity(rhs, shifted(c, k2, 0.5 * dt), t + 0.5 * dt);
  auto k4 = velocity(rhs, shifted(c, k3, dt), t + dt);
  VortexConfiguration out = c;
  for (std::size_t i = 0; i < c.size(); ++i)
    out.positions[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace

Trajectory integrate(const Rhs& rhs, const VortexConfiguration& c0, double t_start, double t_end,
                     double dt, int record_every) {
  require(dt > 0.0, "integrate: dt must be positive");
  require(t_end >= t_start, "integrate: t_end precedes t_start");
  require(record_every >= 1, "integrate: record_every must be >= 1");
  if (rhs.kind == Rhs::Kind::PW2) {
    require(rhs.nu > 0.0, "integrate: PW2 needs nu > 0");
    require(t_start > 0.0, "integrate: PW2 needs t_start > 0");
  }
  Trajectory traj;
  traj.dt = dt;
  traj.rhs = rhs;
  traj.times.push_back(t_start);
  traj.states.push_back(c0);
  const double d0 = c0.min_distance();
  const double threshold = std::isfinite(d0) ? 1e-6 * d0 : 0.0;
  VortexConfiguration c = c0;
  double t = t_start;
  const auto steps = static_cast<long long>(std::ceil((t_end - t_start) / dt - 1e-9));
  for (long long s = 1; s <= steps; ++s) {
    const double t_next = s == steps ? t_end : t_start + s * dt;
    c = rk4_step(rhs, c, t, t_next - t);
    t = t_next;
    const bool collided = !(c.min_distance() >= threshold);
    if (collided || s % record_every == 0 || s == steps) {
      traj.times.push_back(t);
      traj.states.push_back(c);
    }
    if (collided) {
      traj.status = TrajectoryStatus::CollisionTerminated;
      break;
    }
  }
  return traj;
}

VortexConfiguration Trajectory::state_at(double t) const {
  require(!times.empty(), "Trajectory::state_at: empty trajectory");
  require(t >= times.front() - 1e-12 && t <= times.back() + 1e-12,
          "Trajectory::state_at: time outside the trajectory");
  auto it = std::upper_bound(times.begin(), times.end(), t + 1e-14);
  const std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - times.begin() - 1, 0));
  VortexConfiguration c = states[k];
  double s = times[k];
  while (t - s > 1e-14) {
    const double h = std::min(dt, t - s);
    c = rk4_step(rhs, c, s, h);
    s += h;
  }
  return c;
}

FirstIntegrals first_integrals(const VortexConfiguration& c) {
  check_distinct(c);
  FirstIntegrals f;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double gi = c.circulations[i];
    f.M += gi * c.positions[i];
    f.I += gi * norm2(c.positions[i]);
    for (std::size_t j = 0; j < c.size(); ++j)
      if (i != j)
        f.H -= gi * c.circulations[j] * std::log(norm(c.positions[i] - c.positions[j])) / (4.0 * pi);
  }
  return f;
}

Geometry geometry(const Trajectory& traj) {
  require(!traj.states.empty(), "geometry: empty trajectory");
  require(traj.states.front().size() > 1, "geometry: d is undefined for a single vortex");
  require(traj.status == TrajectoryStatus::Completed,
          "geometry: trajectory was collision-terminated");
  double d = std::numeric_limits<double>::infinity();
  for (const auto& s : traj.states) d = std::min(d, s.min_distance());
  return {d, d * d / traj.states.front().total_abs_circulation()};
}

void write_trajectory(const Trajectory& traj, const std::filesystem::path& stem) {
  require(!traj.states.empty(), "write_trajectory: empty trajectory");
  const std::size_t n = traj.states.front().size();
  std::ofstream csv(stem.string() + ".csv");
  if (!csv) throw std::runtime_error("write_trajectory: cannot open " + stem.string() + ".csv");
  csv << "t";
  for (std::size_t i = 1; i <= n; ++i) csv << ",z" << i << "x,z" << i << "y";
  csv << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    csv << traj.times[k];
    for (const Vec2& z : traj.states[k].positions) csv << ',' << z.x << ',' << z.y;
    csv << '\n';
  }
  nlohmann::json m;
  m["circulations"] = traj.states.front().circulations;
  m["rhs"] = traj.rhs.name();
  m["nu"] = traj.rhs.nu;
  if (traj.rhs.kind == Rhs::Kind::PWPeriodic) m["box_length"] = traj.rhs.box_length;
  m["dt"] = traj.dt;
  m["method"] = traj.method;
  m["status"] =
      traj.status == TrajectoryStatus::Completed ? "completed" : "collision-terminated";
  std::ofstream js(stem.string() + ".json");
  js << m.dump(2) << '\n';
}

}  // namespace vlab
