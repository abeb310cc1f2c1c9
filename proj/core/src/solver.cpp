#include "vlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>

#include "vlab/analytics.hpp"
#include "vlab/fft.hpp"
#include "vlab/fields.hpp"

namespace vlab {
namespace {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

// Per-grid wavenumber tables in r2c layout.
struct Modes {
  int n = 0;
  int nc = 0;
  std::vector<double> kx, ky, k2;  // derivative wavenumbers (Nyquist zeroed) and |k|^2
  std::vector<char> keep;          // 2/3-rule mask

  explicit Modes(const GridSpec& g) : n(g.n_points), nc(g.n_points / 2 + 1) {
    const std::size_t m = g.spectral_size();
    kx.resize(m);
    ky.resize(m);
    k2.resize(m);
    keep.resize(m);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < nc; ++i) {
        const std::size_t idx = static_cast<std::size_t>(j) * nc + i;
        const double ax = g.wavenumber(i), ay = g.wavenumber(j);
        kx[idx] = i == n / 2 ? 0.0 : ax;
        ky[idx] = j == n / 2 ? 0.0 : ay;
        k2[idx] = ax * ax + ay * ay;
        keep[idx] = std::abs(fft::frequency(i, n)) <= n / 3 && std::abs(fft::frequency(j, n)) <= n / 3;
      }
  }
};

struct Workspace {
  const Modes& modes;
  bool dealias;
  std::vector<double> u, v, w, fu, fv;
  Spectrum uh, vh, a, b;

  Workspace(const Modes& m, bool d)
      : modes(m),
        dealias(d),
        u(static_cast<std::size_t>(m.n) * m.n),
        v(u.size()),
        w(u.size()),
        fu(u.size()),
        fv(u.size()),
        uh(static_cast<std::size_t>(m.n) * m.nc),
        vh(uh.size()),
        a(uh.size()),
        b(uh.size()) {}

  // Velocity of wh into u, v (physical); returns max |u|.
  double velocity(const Spectrum& wh) {
    for (std::size_t k = 0; k < wh.size(); ++k) {
      if (modes.k2[k] == 0.0) {
        uh[k] = vh[k] = 0.0;
        continue;
      }
      const Complex psi = wh[k] / modes.k2[k];
      uh[k] = Complex(0.0, modes.ky[k]) * psi;
      vh[k] = -Complex(0.0, modes.kx[k]) * psi;
    }
    fft::inverse(modes.n, modes.n, uh, u);
    fft::inverse(modes.n, modes.n, vh, v);
    double m = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) m = std::max(m, std::hypot(u[k], v[k]));
    return m;
  }

  // -div(u w) in spectral form.
  void nonlinear(const Spectrum& wh, Spectrum& out) {
    velocity(wh);
    fft::inverse(modes.n, modes.n, wh, w);
    for (std::size_t k = 0; k < w.size(); ++k) {
      fu[k] = u[k] * w[k];
      fv[k] = v[k] * w[k];
    }
    fft::forward(modes.n, modes.n, fu, a);
    fft::forward(modes.n, modes.n, fv, b);
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = -(Complex(0.0, modes.kx[k]) * a[k] + Complex(0.0, modes.ky[k]) * b[k]);
      if (dealias && !modes.keep[k]) out[k] = 0.0;
    }
  }
};

const Modes& modes_for(const GridSpec& g) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, std::unique_ptr<Modes>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{g.n_points, g.box_length}];
  if (!slot) slot = std::make_unique<Modes>(g);
  return *slot;
}

double cfl_number(double dt, double max_u, const GridSpec& g) { return dt * max_u / g.spacing(); }

// One IF-RK4 step on spectral data; returns the CFL number of the start state.
double rk4_step(Workspace& ws, Spectrum& wh, double dt, double nu, const GridSpec& g,
                double cfl_limit) {
  const double max_u = ws.velocity(wh);
  const double cfl = cfl_number(dt, max_u, g);
  if (cfl > cfl_limit) throw CflViolation(max_u, cfl);
  const std::size_t m = wh.size();
  Spectrum k1(m), k2(m), k3(m), k4(m), tmp(m);
  std::vector<double> E(m), Eh(m);
  for (std::size_t k = 0; k < m; ++k) {
    E[k] = std::exp(-nu * ws.modes.k2[k] * dt);
    Eh[k] = std::exp(-0.5 * nu * ws.modes.k2[k] * dt);
  }
  ws.nonlinear(wh, k1);
  for (std::size_t k = 0; k < m; ++k) tmp[k] = Eh[k] * (wh[k] + 0.5 * dt * k1[k]);
  ws.nonlinear(tmp, k2);
  for (std::size_t k = 0; k < m; ++k) tmp[k] = Eh[k] * wh[k] + 0.5 * dt * k2[k];
  ws.nonlinear(tmp, k3);
  for (std::size_t k = 0; k < m; ++k) tmp[k] = E[k] * wh[k] + dt * Eh[k] * k3[k];
  ws.nonlinear(tmp, k4);
  for (std::size_t k = 0; k < m; ++k)
    wh[k] = E[k] * wh[k] + dt / 6.0 * (E[k] * k1[k] + 2.0 * Eh[k] * (k2[k] + k3[k]) + k4[k]);
  return cfl;
}

}  // namespace

void SolverConfig::validate() const {
  require(nu > 0.0, "SolverConfig: nu must be positive");
  require(dt > 0.0, "SolverConfig: dt must be positive");
  require(t0 > 0.0, "SolverConfig: t0 must be positive");
  require(t_end >= t0, "SolverConfig: t_end must not precede t0");
  require(cfl_limit > 0.0, "SolverConfig: cfl_limit must be positive");
  require(energy_d > 0.0, "SolverConfig: energy_d must be positive");
  require(std::is_sorted(snapshot_times.begin(), snapshot_times.end()),
          "SolverConfig: snapshot_times must be sorted");
}

ScalarField2D step(const ScalarField2D& w, double dt, double nu, bool dealias, double cfl_limit) {
  require(dt > 0.0, "step: dt must be positive");
  require(nu >= 0.0, "step: nu must be nonnegative");
  const GridSpec& g = w.grid();
  Workspace ws(modes_for(g), dealias);
  Spectrum wh = w.spectral();
  rk4_step(ws, wh, dt, nu, g, cfl_limit);
  return ScalarField2D::from_spectral(g, std::move(wh));
}

ScalarField2D heat_step(const ScalarField2D& w, double dt, double nu) {
  const Modes& m = modes_for(w.grid());
  Spectrum wh = w.spectral();
  for (std::size_t k = 0; k < wh.size(); ++k) wh[k] *= std::exp(-nu * m.k2[k] * dt);
  return ScalarField2D::from_spectral(w.grid(), std::move(wh));
}

Diagnostics diagnose(const ScalarField2D& w, double t, double energy_d, double cfl) {
  Diagnostics d;
  d.t = t;
  const Moments m = moments(w);
  d.gamma = m.gamma;
  d.m1 = m.m1;
  d.m2 = m.m2;
  d.L1 = weighted_norm(w, NormKind::lp(1)).value;
  d.L2 = weighted_norm(w, NormKind::lp(2)).value;
  d.Linf = w.max_abs();
  d.energy = pseudo_energy(w, energy_d);
  d.cfl = cfl;
  return d;
}

RunResult run(const SolverConfig& cfg, const InitialData& initial, StepObserver observer) {
  cfg.validate();
  const GridSpec& g = cfg.grid;
  ScalarField2D w0 = std::holds_alternative<ScalarField2D>(initial)
                         ? std::get<ScalarField2D>(initial)
                         : superposition(std::get<VortexConfiguration>(initial), cfg.nu, cfg.t0, g);
  require(w0.grid() == g, "run: initial field grid differs from the configured grid");

  RunResult out;
  Workspace ws(modes_for(g), cfg.dealias);
  Spectrum wh = w0.spectral();
  double t = cfg.t0;
  double last_cfl = 0.0;
  out.snapshots.push_back({t, w0});
  out.diagnostics.push_back(diagnose(w0, t, cfg.energy_d, 0.0));

  std::vector<double> targets;
  for (double s : cfg.snapshot_times)
    if (s > t && s < cfg.t_end) targets.push_back(s);
  targets.push_back(cfg.t_end);
  std::size_t next = 0;
  const double eps = 1e-12 * std::max(1.0, cfg.t_end);

  while (t < cfg.t_end - eps) {
    double dt = cfg.dt_proportional ? cfg.dt * t / cfg.t0 : cfg.dt;
    bool hit = false;
    if (t + dt >= targets[next] - eps) {
      dt = targets[next] - t;
      hit = true;
    }
    try {
      last_cfl = rk4_step(ws, wh, dt, cfg.nu, g, cfg.cfl_limit);
    } catch (const CflViolation& e) {
      out.aborted = true;
      out.abort_reason = e.what();
      break;
    }
    t = hit ? targets[next] : t + dt;
    ++out.steps;
    const bool periodic_snap = cfg.snapshot_every > 0 && out.steps % cfg.snapshot_every == 0;
    const bool diag_row = cfg.diagnostics_every > 0 && out.steps % cfg.diagnostics_every == 0;
    if (hit || periodic_snap || diag_row || observer) {
      ScalarField2D w = ScalarField2D::from_spectral(g, wh);
      if (observer) observer(t, w);
      if (hit || periodic_snap) out.snapshots.push_back({t, w});
      if (hit || periodic_snap || diag_row)
        out.diagnostics.push_back(diagnose(w, t, cfg.energy_d, last_cfl));
    }
    if (hit) ++next;
  }
  return out;
}

void write_diagnostics(const std::vector<Diagnostics>& rows, const std::filesystem::path& file) {
  std::ofstream f(file);
  if (!f) throw std::runtime_error("write_diagnostics: cannot open " + file.string());
  f << "t,gamma,m1x,m1y,m2,L1,L2,Linf,E_d,cfl\n" << std::setprecision(17);
  for (const auto& d : rows)
    f << d.t << ',' << d.gamma << ',' << d.m1.x << ',' << d.m1.y << ',' << d.m2 << ',' << d.L1
      << ',' << d.L2 << ',' << d.Linf << ',' << d.energy << ',' << d.cfl << '\n';
}

}  // namespace vlab
