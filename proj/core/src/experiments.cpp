#include "vlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <random>
#include <set>
#include <sstream>

#include "vlab/analytics.hpp"
#include "vlab/deformation.hpp"
#include "vlab/fields.hpp"
#include "vlab/parallel.hpp"
#include "vlab/selfsimilar.hpp"
#include "vlab/snapshot.hpp"
#include "vlab/spectral_lab.hpp"

#ifndef VLAB_VERSION
#define VLAB_VERSION "unknown"
#endif

namespace vlab {
namespace {

using json = nlohmann::json;
using Complex = std::complex<double>;

struct IdName {
  ExperimentId id;
  const char* name;
};

constexpr IdName id_names[] = {
    {ExperimentId::OseenConvergence, "E1-oseen-convergence"},
    {ExperimentId::PerturbationDecay, "E2-perturbation-decay"},
    {ExperimentId::Theorem4Scaling, "E3-theorem4-scaling"},
    {ExperimentId::Deformation, "E4-deformation"},
    {ExperimentId::BoundsSweep, "E5-bounds-sweep"},
};

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require_grid(int n, double L, const std::string& who) {
  require(n >= 8 && n % 2 == 0, who + ": n_points must be even and >= 8");
  require(positive_finite(L), who + ": box_length must be positive");
}

std::string format_number(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

// Writes outputs under the experiment directory and remembers them.
class Output {
 public:
  explicit Output(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_ / "series");
    std::filesystem::create_directories(root_ / "fields");
  }

  const std::filesystem::path& root() const { return root_; }

  void csv(const std::string& name, const std::string& header,
           const std::vector<std::vector<double>>& rows) {
    const auto rel = std::filesystem::path("series") / (name + ".csv");
    std::ofstream f(root_ / rel);
    if (!f) throw std::runtime_error("cannot open " + (root_ / rel).string());
    f << header << '\n' << std::setprecision(17);
    for (const auto& row : rows) {
      for (std::size_t k = 0; k < row.size(); ++k) f << (k ? "," : "") << row[k];
      f << '\n';
    }
    add(rel);
  }

  void field(const std::string& name, const ScalarField2D& w, double t, double nu) {
    const auto rel = std::filesystem::path("fields") / (name + "." + field_format);
    write_field(root_ / rel, w, {t, nu});
    add(rel);
    add(rel.string() + ".meta");
  }

  void diagnostics(const std::string& name, const std::vector<Diagnostics>& rows) {
    const auto rel = std::filesystem::path("series") / (name + ".csv");
    write_diagnostics(rows, root_ / rel);
    add(rel);
  }

  void add(const std::filesystem::path& rel) {
    std::lock_guard lock(mu_);
    files_.push_back(rel);
  }

  std::vector<std::filesystem::path> files() const {
    auto f = files_;
    std::sort(f.begin(), f.end());
    return f;
  }

 private:
  std::filesystem::path root_;
  std::mutex mu_;
  std::vector<std::filesystem::path> files_;
};

double l1_norm(const ScalarField2D& w) {
  double s = 0.0;
  for (double v : w.values()) s += std::abs(v);
  const double h = w.grid().spacing();
  return s * h * h;
}

// X norm restricted to the disk |xi| <= R (grid read as xi).
double x_norm_disk(const ScalarField2D& w, double R) {
  const GridSpec& g = w.grid();
  const double h = g.spacing();
  double s = 0.0;
  for (int j = 0; j < g.n_points; ++j)
    for (int i = 0; i < g.n_points; ++i) {
      const Vec2 xi = g.point(i, j);
      const double r2 = norm2(xi);
      if (r2 > R * R) continue;
      s += w(i, j) * w(i, j) * 4.0 * pi * std::exp(0.25 * r2);
    }
  return std::sqrt(s * h * h);
}

// f'(x_k) from three possibly unequal neighbouring samples.
double three_point_derivative(const std::vector<double>& x, const std::vector<double>& f,
                              std::size_t k) {
  const double h1 = x[k] - x[k - 1];
  const double h2 = x[k + 1] - x[k];
  return -h2 / (h1 * (h1 + h2)) * f[k - 1] + (h2 - h1) / (h1 * h2) * f[k] +
         h1 / (h2 * (h1 + h2)) * f[k + 1];
}

Check make_check(std::string criterion, std::string clause, bool pass, double value, double tol,
                 std::string detail = {}) {
  return {std::move(criterion), std::move(clause), pass, value, tol, std::move(detail)};
}

void require_run(const RunResult& r, const std::string& stage) {
  if (r.aborted) throw ExperimentFailure(stage, r.abort_reason);
}

// Relative circulation drift over a run, checked against a round-off budget.
Check circulation_check(const RunResult& r, const std::string& label) {
  double gamma0 = r.diagnostics.front().gamma, drift = 0.0;
  for (const auto& d : r.diagnostics) drift = std::max(drift, std::abs(d.gamma - gamma0));
  const double rel = drift / std::max(std::abs(gamma0), 1e-300);
  return make_check("invariant", "circulation drift " + label, rel <= 1e-10, rel, 1e-10);
}

// ---------------------------------------------------------------- E1

void run_convergence(const ExperimentConfig& cfg, Output& out, ExperimentReport& rep) {
  const ConvergenceParams& p = cfg.convergence;
  const GridSpec g(p.n_points, p.box_length);
  const double sq = std::sqrt(p.nu);
  const int m = p.bump_mode;
  const double pmax = std::pow(2.0 * m, 0.5 * m) * std::exp(-0.5 * m);
  auto w0 = [&](Vec2 xi) {
    const Complex z = std::pow(Complex(xi.x, xi.y), m);
    return p.alpha * gaussian(xi) * (1.0 + p.bump * z.real() * std::exp(-0.25 * norm2(xi)) / pmax);
  };
  // Frame t0 = T = 1: omega(x, 1) = w0(x / sqrt(nu)).
  const ScalarField2D omega0 = ScalarField2D::sample(g, [&](Vec2 x) { return w0(x / sq); });
  const RescaledFrame frame{};
  SolverConfig sc;
  sc.grid = g;
  sc.nu = p.nu;
  sc.dt = p.dt;
  sc.dt_proportional = true;
  sc.t0 = 1.0;
  sc.t_end = std::exp(p.tau_end);
  for (int k = 1; k <= p.samples; ++k) sc.snapshot_times.push_back(std::exp(p.tau_end * k / p.samples));
  sc.validate();

  std::vector<double> taus, H, D;
  auto entropy_at = [&](double s, const ScalarField2D& w) {
    const SelfSimilarField ss = to_selfsimilar(w, s - frame.t0, p.nu, frame);
    taus.push_back(ss.tau);
    H.push_back(relative_entropy(ss.w).value);
    D.push_back(entropy_dissipation(ss.w));
  };
  RunResult res;
  try {
    entropy_at(1.0, omega0);
    res = run(sc, omega0, entropy_at);
  } catch (const std::exception& e) {
    throw ExperimentFailure("E1 solver/entropy", e.what());
  }
  out.diagnostics("diagnostics", res.diagnostics);
  require_run(res, "E1 solver");
  out.field("initial", omega0, 1.0, p.nu);
  out.field("final", res.snapshots.back().w, res.snapshots.back().t, p.nu);

  const double gamma = p.alpha * p.nu;
  std::vector<double> tau_s, log_e;
  std::vector<std::vector<double>> rows;
  for (const auto& s : res.snapshots) {
    const Moments mo = moments(s.w);
    const VortexConfiguration c({mo.m1 / mo.gamma}, {mo.gamma});
    const double e = l1_norm(s.w - superposition(c, p.nu, s.t, g)) / std::abs(gamma);
    const double tau = std::log(s.t);
    rows.push_back({tau, s.t, e});
    tau_s.push_back(tau);
    log_e.push_back(std::log(e));
  }
  out.csv("l1_distance", "tau,t,l1_over_gamma", rows);
  const ScalingFit fit = fit_line(tau_s, log_e);
  rep.fits.push_back({"log L1 distance vs tau", fit});
  rep.metrics["decay_rate"] = -fit.slope;
  rep.checks.push_back(make_check("E1", "L1 distance to the Oseen vortex decays at rate >= 0.45",
                                  -fit.slope >= 0.45, -fit.slope, 0.45));

  // Entropy along the run.
  double max_increase = -std::numeric_limits<double>::infinity(), max_rel = 0.0;
  std::vector<std::vector<double>> erows;
  for (std::size_t k = 0; k < H.size(); ++k) {
    double dH = std::numeric_limits<double>::quiet_NaN();
    if (k > 0) max_increase = std::max(max_increase, H[k] - H[k - 1]);
    if (k > 0 && k + 1 < H.size()) {
      dH = three_point_derivative(taus, H, k);
      max_rel = std::max(max_rel, std::abs(dH + D[k]) / D[k]);
    }
    erows.push_back({taus[k], H[k], D[k], dH});
  }
  out.csv("entropy", "tau,H,D,dH_dtau", erows);
  rep.metrics["entropy_max_step_increase"] = max_increase;
  rep.metrics["entropy_dH_plus_D_rel"] = max_rel;
  rep.checks.push_back(make_check("C8", "H nonincreasing (per-step increase <= 1e-10)",
                                  max_increase <= 1e-10, max_increase, 1e-10));
  rep.checks.push_back(make_check("C8", "finite-difference dH/dtau matches -D within 1%",
                                  max_rel <= 0.01, max_rel, 0.01));
  const GridSpec gx(256, 40.0);
  const double h2g = relative_entropy(ScalarField2D::sample(gx, [](Vec2 xi) { return 2.0 * gaussian(xi); })).value;
  rep.checks.push_back(make_check("C8", "H(2G) = 2 log 2 within 1e-8",
                                  std::abs(h2g - 2.0 * std::log(2.0)) <= 1e-8,
                                  std::abs(h2g - 2.0 * std::log(2.0)), 1e-8));
  rep.checks.push_back(circulation_check(res, "E1"));
}

// ---------------------------------------------------------------- E2

struct DecayCase {
  double alpha = 0.0;
  Subspace subspace = Subspace::X1;
  std::string label;
  double rate = 0.0;
  ScalingFit fit;
  std::vector<std::vector<double>> rows;
  RunResult run;
};

ScalarField2D decay_perturbation(const PerturbationParams& p, const GridSpec& gx, Subspace target,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double c[5];
  for (double& v : c) v = normal(rng);
  const bool x1 = target == Subspace::X1;
  const ScalarField2D base = ScalarField2D::sample(gx, [&](Vec2 xi) {
    const double G = gaussian(xi), X = xi.x, Y = xi.y;
    const double d1 = -0.5 * X * G, d2 = -0.5 * Y * G;
    const double d11 = (0.25 * X * X - 0.5) * G, d22 = (0.25 * Y * Y - 0.5) * G, d12 = 0.25 * X * Y * G;
    const double second = c[0] * (d11 - d22) + c[1] * d12;
    if (x1) return d11 + d22 + p.mix * second;
    return c[2] * d1 + c[3] * d2 + p.mix * (second + c[4] * (d11 + d22));
  });
  ScalarField2D w = project_subspace(base, target);
  const double nx = weighted_norm(w, NormKind::x()).value;
  if (!(nx > 0.0)) throw NumericalFailure("perturbation vanished after projection");
  w *= p.size / nx;
  return w;
}

void run_decay_case(const PerturbationParams& p, std::uint64_t seed, DecayCase& dc) {
  const GridSpec g(p.n_points, p.box_length);
  const double sq = std::sqrt(p.nu);
  const GridSpec gx(p.n_points, p.box_length / sq);
  const ScalarField2D pert = decay_perturbation(p, gx, dc.subspace, seed);
  std::vector<double> v(pert.values().begin(), pert.values().end());
  for (int j = 0; j < g.n_points; ++j)
    for (int i = 0; i < g.n_points; ++i)
      v[static_cast<std::size_t>(j) * g.n_points + i] += dc.alpha * gaussian(gx.point(i, j));
  const ScalarField2D omega0(g, std::move(v));

  SolverConfig sc;
  sc.grid = g;
  sc.nu = p.nu;
  sc.dt = p.dt;
  sc.dt_proportional = true;
  sc.t0 = 1.0;
  sc.t_end = std::exp(p.tau_end);
  for (int k = 1; k <= p.samples; ++k) sc.snapshot_times.push_back(std::exp(p.tau_end * k / p.samples));
  sc.validate();
  dc.run = run(sc, omega0);
  require_run(dc.run, "E2 solver " + dc.label);

  const RescaledFrame frame{};
  std::vector<double> taus, logs;
  for (const auto& s : dc.run.snapshots) {
    const SelfSimilarField ss = to_selfsimilar(s.w, s.t - frame.t0, p.nu, frame);
    const ScalarField2D G = ScalarField2D::sample(ss.w.grid(), [&](Vec2 xi) { return dc.alpha * gaussian(xi); });
    const double nrm = x_norm_disk(ss.w - G, p.xi_radius);
    dc.rows.push_back({ss.tau, nrm});
    taus.push_back(ss.tau);
    logs.push_back(std::log(nrm));
  }
  dc.fit = fit_line(taus, logs);
  dc.rate = -dc.fit.slope;
}

void run_perturbation(const ExperimentConfig& cfg, Output& out, ExperimentReport& rep) {
  const PerturbationParams& p = cfg.perturbation;
  std::vector<DecayCase> cases;
  for (const Subspace s : {Subspace::X1, Subspace::X0})
    for (double a : p.alphas) {
      DecayCase dc;
      dc.alpha = a;
      dc.subspace = s;
      dc.label = std::string(s == Subspace::X1 ? "X1" : "X0") + "_alpha" + format_number(a);
      cases.push_back(std::move(dc));
    }
  try {
    parallel_for(cases.size(), [&](std::size_t k) { run_decay_case(p, cfg.seed * 7919u + k, cases[k]); });
  } catch (const ExperimentFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw ExperimentFailure("E2 decay runs", e.what());
  }
  for (const auto& dc : cases) {
    out.csv("decay_" + dc.label, "tau,x_norm", dc.rows);
    out.diagnostics("diagnostics_" + dc.label, dc.run.diagnostics);
    rep.fits.push_back({"log X norm vs tau " + dc.label, dc.fit});
    rep.metrics["rate_" + dc.label] = dc.rate;
    const bool x1 = dc.subspace == Subspace::X1;
    const double target = x1 ? 1.0 : 0.5, tol = x1 ? 0.1 : 0.05;
    rep.checks.push_back(make_check("C7",
                                    std::string(x1 ? "X1" : "X0 \\ X1") + " decay rate " +
                                        format_number(target) + " at alpha = " + format_number(dc.alpha),
                                    std::abs(dc.rate - target) <= tol, dc.rate, tol,
                                    "fit over tau in [0, " + format_number(p.tau_end) + "]"));
    rep.checks.push_back(circulation_check(dc.run, dc.label));
  }
}

// ---------------------------------------------------------------- E3 / E4

struct PairRun {
  double nu = 0.0;
  double t0 = 0.0;
  RunResult run;
  Trajectory traj;
  std::vector<double> error;
};

std::string nu_label(double nu) { return "nu" + format_number(nu); }

void run_pair(const PairParams& p, PairRun& pr) {
  const double T0 = p.turnover_time();
  pr.t0 = p.nu_t0 * p.d * p.d / pr.nu;
  const VortexConfiguration c0({{-0.5 * p.d, 0.0}, {0.5 * p.d, 0.0}}, {p.gamma, p.gamma});
  SolverConfig sc;
  sc.grid = GridSpec(p.n_points, p.box_length);
  sc.nu = pr.nu;
  sc.dt = p.dt;
  sc.t0 = pr.t0;
  sc.t_end = pr.t0 + p.span * T0;
  for (int k = 1; k <= p.samples; ++k) sc.snapshot_times.push_back(pr.t0 + p.span * T0 * k / p.samples);
  sc.validate();
  pr.run = run(sc, c0);
  require_run(pr.run, "pair solver " + nu_label(pr.nu));
  std::vector<double> times;
  for (const auto& s : pr.run.snapshots) times.push_back(s.t);
  pr.traj = trajectory_at(Rhs::periodic(p.box_length), c0, times, T0 / p.pv_steps_per_T0);
  pr.error = theorem4_error(pr.run.snapshots, pr.traj, pr.nu);
}

std::vector<PairRun> run_pairs(const PairParams& p, const std::string& stage) {
  std::vector<PairRun> runs(p.nus.size());
  for (std::size_t k = 0; k < runs.size(); ++k) runs[k].nu = p.nus[k];
  try {
    parallel_for(runs.size(), [&](std::size_t k) { run_pair(p, runs[k]); });
  } catch (const ExperimentFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw ExperimentFailure(stage, e.what());
  }
  return runs;
}

void persist_pair(const PairRun& pr, const PairParams& p, Output& out) {
  const std::string lab = nu_label(pr.nu);
  const double d2 = p.d * p.d;
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < pr.run.snapshots.size(); ++k) {
    const double t = pr.run.snapshots[k].t;
    const double x = pr.nu * t / d2;
    rows.push_back({t, x, pr.error[k], pr.error[k] / x});
  }
  out.csv("theorem4_" + lab, "t,nu_t_over_d2,e,e_over_x", rows);
  out.diagnostics("diagnostics_" + lab, pr.run.diagnostics);
  write_trajectory(pr.traj, out.root() / "series" / ("trajectory_" + lab));
  out.add(std::filesystem::path("series") / ("trajectory_" + lab + ".csv"));
  out.add(std::filesystem::path("series") / ("trajectory_" + lab + ".json"));
  const Snapshot& last = pr.run.snapshots.back();
  out.field("final_" + lab, last.w, last.t, pr.nu);
}

void run_theorem4(const ExperimentConfig& cfg, Output& out, ExperimentReport& rep) {
  const PairParams& p = cfg.pair;
  std::vector<PairRun> runs = run_pairs(p, "E3 pair runs");
  std::vector<double> xs, es, Ks;
  std::vector<std::vector<double>> rows;
  double init_residual = 0.0;
  for (const PairRun& pr : runs) {
    persist_pair(pr, p, out);
    const double t_end = pr.run.snapshots.back().t;
    const double x = pr.nu * t_end / (p.d * p.d);
    const double e = pr.error.back();
    xs.push_back(x);
    es.push_back(e);
    Ks.push_back(e / x);
    init_residual = std::max(init_residual, pr.error.front());
    rows.push_back({pr.nu, pr.t0, t_end, x, e, e / x});
    rep.checks.push_back(circulation_check(pr.run, nu_label(pr.nu)));
  }
  out.csv("theorem4_summary", "nu,t0,t_end,nu_t_over_d2,e,K", rows);
  rep.checks.push_back(make_check("C9", "e(t0) equals the initialization residual <= 1e-10",
                                  init_residual <= 1e-10, init_residual, 1e-10));
  if (xs.size() >= 3) {
    const ScalingFit fit = fit_scaling(xs, es);
    rep.fits.push_back({"log e vs log(nu t / d^2) at t = t0 + span T0", fit});
    rep.metrics["slope"] = fit.slope;
    rep.checks.push_back(make_check("C9", "log-log slope of e vs nu t / d^2 is 1 +- 0.15",
                                    std::abs(fit.slope - 1.0) <= 0.15, fit.slope, 0.15));
  } else {
    rep.warnings.push_back("fewer than three viscosities: no slope fit");
  }
  const auto [kmin, kmax] = std::minmax_element(Ks.begin(), Ks.end());
  const double spread = *kmax / *kmin - 1.0;
  rep.metrics["K_min"] = *kmin;
  rep.metrics["K_max"] = *kmax;
  rep.checks.push_back(make_check("C9", "fitted K stable within 20% across the sweep",
                                  spread <= 0.2, spread, 0.2));
}

void run_deformation(const ExperimentConfig& cfg, Output& out, ExperimentReport& rep) {
  const PairParams& p = cfg.pair;
  std::vector<PairRun> runs = run_pairs(p, "E4 pair runs");

  const auto shape_grid = std::make_shared<const RadialGrid>();
  const DeformationShape shape = deformation_shape(shape_grid);
  std::vector<double> edges;
  for (double r = 0.0; r < p.extraction_radius - 1e-12; r += 0.5) edges.push_back(r);
  edges.push_back(p.extraction_radius);
  const auto radii = std::make_shared<const RadialGrid>(RadialGrid::from_edges(edges, 8));
  RadialModeProfile shape_on{radii, 2, {}};
  double shape_max = 0.0;
  for (double r : radii->nodes()) {
    shape_on.amplitudes.push_back(shape.profile.grid->evaluate(shape.profile.amplitudes, r));
    shape_max = std::max(shape_max, std::abs(shape_on.amplitudes.back()));
  }
  {
    std::vector<std::vector<double>> rows;
    const auto& r = shape_grid->nodes();
    for (std::size_t k = 0; k < r.size(); ++k) rows.push_back({r[k], shape.profile.amplitudes[k].real()});
    out.csv("deformation_shape", "r,w", rows);
  }
  rep.metrics["shape_residual"] = shape.residual;
  rep.metrics["shape_c1"] = shape.c1;
  rep.metrics["shape_c2"] = shape.c2;
  rep.checks.push_back(make_check("C11", "solve profile ~ r^{2 +- 0.05} near 0",
                                  std::abs(shape.origin_exponent - 2.0) <= 0.05,
                                  shape.origin_exponent, 0.05));
  rep.checks.push_back(make_check("C11", "solve profile Gaussian tail log-slope -1/4 within 2%",
                                  std::abs(shape.tail_log_slope + 0.25) <= 0.02 * 0.25,
                                  shape.tail_log_slope, 0.02 * 0.25));

  std::vector<double> xs, amps;
  for (PairRun& pr : runs) {
    persist_pair(pr, p, out);
    const std::string lab = nu_label(pr.nu);
    std::vector<std::vector<double>> rows;
    DeformationExtraction last;
    double last_x = 0.0;
    for (std::size_t k = 1; k < pr.run.snapshots.size(); ++k) {
      const Snapshot& s = pr.run.snapshots[k];
      const VortexConfiguration c = pr.traj.states[k];
      const DeformationExtraction ex =
          deformation_extract(s, 0, c, pr.nu, radii, p.fit_radius, p.angles);
      const Vec2 z = c.positions[1] - c.positions[0];
      const double theta = std::atan2(z.y, z.x);
      const double x = pr.nu * s.t / norm2(z);
      const double cosine = profile_cosine(ex.profile, ex.phase, shape_on, p.fit_radius);
      // Leading-order prediction of the peak: (nu t / |z|^2) max w / (4 pi).
      const double predicted = x * shape_max / (4.0 * pi);
      rows.push_back({s.t, x, ex.phase, theta, std::remainder(ex.phase - theta, pi), ex.amplitude_max,
                      ex.r_at_max, cosine, ex.amplitude_max / predicted, ex.contamination});
      for (const auto& w : ex.warnings) rep.warnings.push_back(lab + ": " + w);
      if (k + 1 == pr.run.snapshots.size()) {
        last = ex;
        last_x = x;
        rep.metrics["amplitude_over_prediction_" + lab] = ex.amplitude_max / predicted;
        rep.checks.push_back(make_check("C11", "radial shape cosine-similar (>= 0.95) to the solve, " + lab,
                                        cosine >= 0.95, cosine, 0.95));
        const DeformationExtraction ex1 =
            deformation_extract(s, 1, c, pr.nu, radii, p.fit_radius, p.angles);
        for (std::size_t v = 0; v < 2; ++v) {
          const double ph = v == 0 ? ex.phase : ex1.phase;
          const double dphi = std::abs(std::remainder(ph - theta, pi));
          rep.checks.push_back(make_check(
              "C11", "mode-2 phase = theta_ij within 0.05 rad, vortex " + std::to_string(v) + ", " + lab,
              dphi <= 0.05, dphi, 0.05));
        }
      }
    }
    out.csv("deformation_" + lab,
            "t,nu_t_over_z2,phase,theta_ij,phase_error,amplitude_max,r_at_max,cosine,amplitude_over_prediction,contamination",
            rows);
    std::vector<std::vector<double>> prof;
    const auto& r = radii->nodes();
    for (std::size_t k = 0; k < r.size(); ++k)
      prof.push_back({r[k], last.profile.amplitudes[k].real(), last.profile.amplitudes[k].imag(),
                      shape_on.amplitudes[k].real()});
    out.csv("profile_" + lab, "r,re,im,shape", prof);
    xs.push_back(last_x);
    amps.push_back(last.amplitude_max);
  }
  if (xs.size() >= 3) {
    const ScalingFit fit = fit_scaling(xs, amps);
    rep.fits.push_back({"log peak mode-2 amplitude vs log(nu t / |z_ij|^2)", fit});
    rep.checks.push_back(make_check("C11", "peak amplitude ~ nu t / |z_ij|^2 with slope 1 +- 0.15",
                                    std::abs(fit.slope - 1.0) <= 0.15, fit.slope, 0.15));
  } else {
    rep.warnings.push_back("fewer than three viscosities: no amplitude fit");
  }
}

// ---------------------------------------------------------------- E5

void run_bounds(const ExperimentConfig& cfg, Output& out, ExperimentReport& rep) {
  const BoundsParams& p = cfg.bounds;
  ModeDiscretization disc;
  disc.basis_size = p.basis_size;
  BoundsOptions opts;
  opts.n_max = p.n_max;
  opts.lambda_count = p.lambda_count;
  opts.lambda_range = p.lambda_range;
  BoundsReport br;
  try {
    br = bounds_sweep(p.alphas, disc, opts);
  } catch (const std::exception& e) {
    throw ExperimentFailure("E5 bounds sweep", e.what());
  }
  write_bounds(br, out.root() / "series" / "bounds");
  out.add("series/bounds.csv");
  out.add("series/bounds.json");
  const double tol = br.tol_disc;
  const AlphaBounds* a8 = nullptr;
  const AlphaBounds* a128 = nullptr;
  for (const auto& row : br.rows) {
    const std::string at = "alpha = " + format_number(row.alpha);
    if (row.range_flag) rep.warnings.push_back("Psi minimizer on the lambda-range boundary at " + at);
    rep.checks.push_back(make_check("C6", "Sigma >= Psi at " + at, row.Sigma >= row.Psi * (1.0 - 1e-9),
                                    row.Sigma - row.Psi, 0.0));
    rep.checks.push_back(make_check("C6", "Psi >= 1 - 0.02 at " + at, row.Psi >= 1.0 - tol, row.Psi,
                                    1.0 - tol));
    if (row.alpha == 0.0) {
      rep.checks.push_back(make_check("C6", "Sigma(0) = 1 within 2%", std::abs(row.Sigma - 1.0) <= tol,
                                      row.Sigma, tol));
      rep.checks.push_back(make_check("C6", "Psi(0) = 1 within 2%", std::abs(row.Psi - 1.0) <= tol,
                                      row.Psi, tol));
    }
    if (row.alpha == 8.0) a8 = &row;
    if (row.alpha == 128.0) a128 = &row;
  }
  if (a8 && a128)
    rep.checks.push_back(make_check("C6", "Sigma(128) > Sigma(8)", a128->Sigma > a8->Sigma,
                                    a128->Sigma - a8->Sigma, 0.0));
  if (br.sigma_fit) rep.fits.push_back({"log Sigma vs log alpha (8..512)", *br.sigma_fit});
  if (br.psi_fit) rep.fits.push_back({"log Psi vs log alpha (8..512)", *br.psi_fit});
}

// ---------------------------------------------------------------- JSON

json fit_json(const ScalingFit& f) {
  return {{"slope", f.slope},          {"intercept", f.intercept}, {"r2", f.r2},
          {"slope_stderr", f.slope_stderr}, {"slope_ci95", f.slope_ci95}, {"points", f.points}};
}

json report_json(const ExperimentReport& rep) {
  json j;
  j["experiment"] = to_string(rep.id);
  j["passed"] = rep.passed();
  j["checks"] = json::array();
  for (const auto& c : rep.checks)
    j["checks"].push_back({{"criterion", c.criterion},
                           {"clause", c.clause},
                           {"pass", c.pass},
                           {"value", c.value},
                           {"tolerance", c.tolerance},
                           {"detail", c.detail}});
  j["fits"] = json::array();
  for (const auto& f : rep.fits) j["fits"].push_back({{"name", f.name}, {"fit", fit_json(f.fit)}});
  j["metrics"] = rep.metrics;
  j["warnings"] = rep.warnings;
  j["files"] = json::array();
  for (const auto& f : rep.files) j["files"].push_back(f.generic_string());
  j["wall_seconds"] = rep.wall_seconds;
  return j;
}

json pair_json(const PairParams& p) {
  return {{"n_points", p.n_points}, {"box_length", p.box_length},
          {"d", p.d},               {"gamma", p.gamma},
          {"nus", p.nus},           {"nu_t0", p.nu_t0},
          {"span", p.span},         {"samples", p.samples},
          {"dt", p.dt},             {"pv_steps_per_T0", p.pv_steps_per_T0},
          {"extraction_radius", p.extraction_radius},
          {"fit_radius", p.fit_radius},
          {"angles", p.angles}};
}

json block_json(const ExperimentConfig& cfg) {
  switch (cfg.id) {
    case ExperimentId::OseenConvergence: {
      const auto& p = cfg.convergence;
      return {{"n_points", p.n_points}, {"box_length", p.box_length}, {"nu", p.nu},
              {"alpha", p.alpha},       {"bump", p.bump},             {"bump_mode", p.bump_mode},
              {"tau_end", p.tau_end},   {"samples", p.samples},       {"dt", p.dt}};
    }
    case ExperimentId::PerturbationDecay: {
      const auto& p = cfg.perturbation;
      return {{"n_points", p.n_points}, {"box_length", p.box_length}, {"nu", p.nu},
              {"alphas", p.alphas},     {"size", p.size},             {"mix", p.mix},
              {"tau_end", p.tau_end},   {"samples", p.samples},       {"dt", p.dt},
              {"xi_radius", p.xi_radius}};
    }
    case ExperimentId::Theorem4Scaling:
    case ExperimentId::Deformation:
      return pair_json(cfg.pair);
    case ExperimentId::BoundsSweep: {
      const auto& p = cfg.bounds;
      return {{"alphas", p.alphas},
              {"basis_size", p.basis_size},
              {"n_max", p.n_max},
              {"lambda_count", p.lambda_count},
              {"lambda_range", p.lambda_range}};
    }
  }
  return {};
}

const char* block_name(ExperimentId id) {
  switch (id) {
    case ExperimentId::OseenConvergence: return "convergence";
    case ExperimentId::PerturbationDecay: return "perturbation";
    case ExperimentId::Theorem4Scaling:
    case ExperimentId::Deformation: return "pair";
    case ExperimentId::BoundsSweep: return "bounds";
  }
  return "";
}

template <class T>
void read_key(const json& j, const char* key, T& v) {
  if (j.contains(key)) v = j.at(key).get<T>();
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidInput(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw InvalidInput(where + ": unknown key '" + k + "'");
}

void read_block(const json& j, ExperimentConfig& cfg) {
  const std::string where = std::string("config.") + block_name(cfg.id);
  std::set<std::string> keys;
  const json defaults = block_json(cfg);
  for (const auto& [k, v] : defaults.items()) keys.insert(k);
  reject_unknown(j, keys, where);
  switch (cfg.id) {
    case ExperimentId::OseenConvergence: {
      auto& p = cfg.convergence;
      read_key(j, "n_points", p.n_points);
      read_key(j, "box_length", p.box_length);
      read_key(j, "nu", p.nu);
      read_key(j, "alpha", p.alpha);
      read_key(j, "bump", p.bump);
      read_key(j, "bump_mode", p.bump_mode);
      read_key(j, "tau_end", p.tau_end);
      read_key(j, "samples", p.samples);
      read_key(j, "dt", p.dt);
      break;
    }
    case ExperimentId::PerturbationDecay: {
      auto& p = cfg.perturbation;
      read_key(j, "n_points", p.n_points);
      read_key(j, "box_length", p.box_length);
      read_key(j, "nu", p.nu);
      read_key(j, "alphas", p.alphas);
      read_key(j, "size", p.size);
      read_key(j, "mix", p.mix);
      read_key(j, "tau_end", p.tau_end);
      read_key(j, "samples", p.samples);
      read_key(j, "dt", p.dt);
      read_key(j, "xi_radius", p.xi_radius);
      break;
    }
    case ExperimentId::Theorem4Scaling:
    case ExperimentId::Deformation: {
      auto& p = cfg.pair;
      read_key(j, "n_points", p.n_points);
      read_key(j, "box_length", p.box_length);
      read_key(j, "d", p.d);
      read_key(j, "gamma", p.gamma);
      read_key(j, "nus", p.nus);
      read_key(j, "nu_t0", p.nu_t0);
      read_key(j, "span", p.span);
      read_key(j, "samples", p.samples);
      read_key(j, "dt", p.dt);
      read_key(j, "pv_steps_per_T0", p.pv_steps_per_T0);
      read_key(j, "extraction_radius", p.extraction_radius);
      read_key(j, "fit_radius", p.fit_radius);
      read_key(j, "angles", p.angles);
      break;
    }
    case ExperimentId::BoundsSweep: {
      auto& p = cfg.bounds;
      read_key(j, "alphas", p.alphas);
      read_key(j, "basis_size", p.basis_size);
      read_key(j, "n_max", p.n_max);
      read_key(j, "lambda_count", p.lambda_count);
      read_key(j, "lambda_range", p.lambda_range);
      break;
    }
  }
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

void write_json(const std::filesystem::path& file, const json& j) {
  std::ofstream f(file);
  if (!f) throw std::runtime_error("cannot open " + file.string());
  f << j.dump(2) << '\n';
}

}  // namespace

// ---------------------------------------------------------------- public

std::string to_string(ExperimentId id) {
  for (const auto& n : id_names)
    if (n.id == id) return n.name;
  return "unknown";
}

ExperimentId parse_experiment_id(std::string_view name) {
  for (const auto& n : id_names)
    if (name == n.name || name == std::string_view(n.name).substr(0, 2)) return n.id;
  throw InvalidInput("unknown experiment '" + std::string(name) + "'");
}

void ConvergenceParams::validate() const {
  require_grid(n_points, box_length, "convergence");
  require(positive_finite(nu) && positive_finite(alpha), "convergence: nu and alpha must be positive");
  require(std::isfinite(bump) && std::abs(bump) < 1.0, "convergence: |bump| must be below 1");
  require(bump_mode >= 2, "convergence: bump_mode must be >= 2 (zero mass and first moments)");
  require(positive_finite(tau_end) && samples >= 3, "convergence: need tau_end > 0 and samples >= 3");
  require(positive_finite(dt), "convergence: dt must be positive");
}

void PerturbationParams::validate() const {
  require_grid(n_points, box_length, "perturbation");
  require(positive_finite(nu), "perturbation: nu must be positive");
  require(!alphas.empty(), "perturbation: alphas must not be empty");
  for (double a : alphas) require(std::isfinite(a), "perturbation: alphas must be finite");
  require(positive_finite(size) && std::isfinite(mix), "perturbation: size must be positive");
  require(positive_finite(tau_end) && samples >= 3, "perturbation: need tau_end > 0 and samples >= 3");
  require(positive_finite(dt) && positive_finite(xi_radius), "perturbation: dt and xi_radius must be positive");
  require(xi_radius * std::sqrt(nu * std::exp(tau_end)) < 0.5 * box_length,
          "perturbation: the xi disk leaves the box before tau_end");
}

void PairParams::validate() const {
  require_grid(n_points, box_length, "pair");
  require(positive_finite(d) && d < 0.5 * box_length, "pair: need 0 < d < box_length / 2");
  require(std::isfinite(gamma) && gamma != 0.0, "pair: gamma must be nonzero");
  require(!nus.empty(), "pair: nus must not be empty");
  for (double nu : nus) require(positive_finite(nu), "pair: viscosities must be positive");
  require(positive_finite(nu_t0), "pair: nu_t0 must be positive");
  require(positive_finite(span) && span <= 3.0, "pair: span must lie in (0, 3] turnover times");
  require(samples >= 1 && positive_finite(dt) && positive_finite(pv_steps_per_T0),
          "pair: samples, dt and pv_steps_per_T0 must be positive");
  require(positive_finite(extraction_radius) && positive_finite(fit_radius) &&
              fit_radius <= extraction_radius,
          "pair: need 0 < fit_radius <= extraction_radius");
  require(angles > 4, "pair: angles must exceed 4");
  for (double nu : nus) {
    const double x_end = nu_t0 + nu * span * turnover_time() / (d * d);
    require(x_end <= 0.1, "pair: nu t / d^2 must stay <= 0.1");
  }
}

void BoundsParams::validate() const {
  require(!alphas.empty(), "bounds: alphas must not be empty");
  for (double a : alphas) require(std::isfinite(a), "bounds: alphas must be finite");
  require(basis_size >= 8 && n_max >= 2 && lambda_count >= 3, "bounds: basis_size, n_max or lambda_count too small");
  require(std::isfinite(lambda_range) && lambda_range >= 0.0, "bounds: lambda_range must be >= 0");
}

ExperimentConfig ExperimentConfig::defaults(ExperimentId id) {
  ExperimentConfig c;
  c.id = id;
  c.output = std::filesystem::path("out") / to_string(id);
  if (id == ExperimentId::Deformation) {
    c.pair.n_points = 512;
    c.pair.box_length = 4.0;
    c.pair.gamma = 10.0;
    c.pair.nu_t0 = 2e-4;
    c.pair.span = 3.0;
    c.pair.dt = 7e-5;
  }
  return c;
}

void ExperimentConfig::validate() const {
  require(!output.empty(), "config: output directory must be set");
  switch (id) {
    case ExperimentId::OseenConvergence: convergence.validate(); break;
    case ExperimentId::PerturbationDecay: perturbation.validate(); break;
    case ExperimentId::Theorem4Scaling:
    case ExperimentId::Deformation: pair.validate(); break;
    case ExperimentId::BoundsSweep: bounds.validate(); break;
  }
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  require(j.is_object() && j.contains("experiment"), "config: missing 'experiment'");
  ExperimentConfig cfg = ExperimentConfig::defaults(parse_experiment_id(j.at("experiment").get<std::string>()));
  reject_unknown(j, {"experiment", "output", "seed", block_name(cfg.id)}, "config");
  try {
    if (j.contains("output")) cfg.output = j.at("output").get<std::string>();
    read_key(j, "seed", cfg.seed);
    if (j.contains(block_name(cfg.id))) read_block(j.at(block_name(cfg.id)), cfg);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& file) {
  std::ifstream f(file);
  if (!f) throw InvalidInput("config: cannot open " + file.string());
  std::ostringstream s;
  s << f.rdbuf();
  return parse_experiment_config(s.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j{{"experiment", to_string(cfg.id)}, {"output", cfg.output.string()}, {"seed", cfg.seed}};
  j[block_name(cfg.id)] = block_json(cfg);
  return j.dump(2);
}

bool ExperimentReport::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  Output out(cfg.output);
  json manifest{{"experiment", to_string(cfg.id)},
                {"config", json::parse(config_to_json(cfg))},
                {"version", VLAB_VERSION},
                {"threads", thread_count()},
                {"started", utc_now()}};
  write_json(cfg.output / "manifest.json", manifest);

  ExperimentReport rep;
  rep.id = cfg.id;
  auto finish = [&](const ExperimentFailure* failure) {
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.files = out.files();
    json r = report_json(rep);
    if (failure) r["error"] = {{"stage", failure->stage}, {"message", failure->what()}};
    write_json(cfg.output / "report.json", r);
    manifest["wall_seconds"] = rep.wall_seconds;
    write_json(cfg.output / "manifest.json", manifest);
  };
  try {
    switch (cfg.id) {
      case ExperimentId::OseenConvergence: run_convergence(cfg, out, rep); break;
      case ExperimentId::PerturbationDecay: run_perturbation(cfg, out, rep); break;
      case ExperimentId::Theorem4Scaling: run_theorem4(cfg, out, rep); break;
      case ExperimentId::Deformation: run_deformation(cfg, out, rep); break;
      case ExperimentId::BoundsSweep: run_bounds(cfg, out, rep); break;
    }
  } catch (const ExperimentFailure& f) {
    finish(&f);
    throw;
  } catch (const std::exception& e) {
    const ExperimentFailure f("report assembly", e.what());
    finish(&f);
    throw f;
  }
  finish(nullptr);
  return rep;
}

Trajectory trajectory_at(const Rhs& rhs, const VortexConfiguration& c0,
                         const std::vector<double>& times, double dt) {
  require(!times.empty() && std::is_sorted(times.begin(), times.end()),
          "trajectory_at: times must be nonempty and sorted");
  require(positive_finite(dt), "trajectory_at: dt must be positive");
  Trajectory out;
  out.rhs = rhs;
  out.dt = dt;
  out.times.push_back(times.front());
  out.states.push_back(c0);
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (times[k] == times[k - 1]) {
      out.times.push_back(times[k]);
      out.states.push_back(out.states.back());
      continue;
    }
    const Trajectory seg = integrate(rhs, out.states.back(), times[k - 1], times[k], dt, 1 << 30);
    if (seg.status != TrajectoryStatus::Completed) {
      out.status = seg.status;
      break;
    }
    out.times.push_back(times[k]);
    out.states.push_back(seg.states.back());
  }
  return out;
}

std::vector<double> theorem4_error(const std::vector<Snapshot>& snapshots, const Trajectory& traj,
                                   double nu) {
  require(positive_finite(nu), "theorem4_error: nu must be positive");
  require(!traj.states.empty(), "theorem4_error: empty trajectory");
  const double gamma_abs = traj.states.front().total_abs_circulation();
  std::vector<double> e;
  for (const auto& s : snapshots) {
    const auto it = std::find_if(traj.times.begin(), traj.times.end(), [&](double t) {
      return std::abs(t - s.t) <= 1e-9 * std::max(1.0, std::abs(s.t));
    });
    if (it == traj.times.end())
      throw InvalidInput("theorem4_error: snapshot time " + format_number(s.t) +
                         " is not a trajectory time");
    const VortexConfiguration& c = traj.states[static_cast<std::size_t>(it - traj.times.begin())];
    e.push_back(l1_norm(s.w - superposition(c, nu, s.t, s.w.grid())) / gamma_abs);
  }
  return e;
}

DeformationExtraction deformation_extract(const Snapshot& snapshot, std::size_t i,
                                          const VortexConfiguration& c, double nu,
                                          std::shared_ptr<const RadialGrid> radii,
                                          double fit_radius, int angles) {
  require(i < c.size(), "deformation_extract: vortex index out of range");
  require(positive_finite(nu) && positive_finite(snapshot.t), "deformation_extract: need nu, t > 0");
  require(radii != nullptr, "deformation_extract: missing radial grid");
  const double t = snapshot.t;
  const double gi = c.circulations[i];
  DeformationExtraction out;
  VortexConfiguration others;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (j == i) continue;
    others.positions.push_back(c.positions[j]);
    others.circulations.push_back(c.circulations[j]);
    out.contamination += std::abs(c.circulations[j] / gi) *
                         std::exp(-norm2(c.positions[j] - c.positions[i]) / (4.0 * nu * t));
  }
  if (c.size() > 1) {
    const double d = c.min_distance();
    if (nu * t / (d * d) > 0.1)
      out.warnings.push_back("nu t / d^2 = " + format_number(nu * t / (d * d)) + " exceeds 0.1");
  }
  if (out.contamination > 1e-8)
    out.warnings.push_back("tail contamination " + format_number(out.contamination) + " exceeds 1e-8");
  ScalarField2D local = snapshot.w;
  if (!others.positions.empty()) local -= superposition(others, nu, t, snapshot.w.grid());

  const double scale = std::sqrt(nu * t);
  const AngularMode am = angular_mode(local, c.positions[i], scale, 2, radii, angles);
  out.outside = am.outside;
  if (am.outside > 0) out.warnings.push_back("sample circles leave the box");
  out.profile = am.profile;
  const double norm = nu * t / gi;
  for (auto& a : out.profile.amplitudes) a *= norm;

  const auto& r = radii->nodes();
  const auto& wq = radii->weights();
  Complex sq = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const Complex a = out.profile.amplitudes[k];
    if (std::abs(a) > out.amplitude_max) {
      out.amplitude_max = std::abs(a);
      out.r_at_max = r[k];
    }
    if (r[k] <= fit_radius) sq += wq[k] * r[k] * a * a;
  }
  // Least squares a(r) ~ A(r) e^{-2 i phase} with real A: 4 phase = -arg sum a^2,
  // and the branch is fixed by a positive peak.
  double phase = -std::arg(sq) / 4.0;
  double sign = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k)
    if (r[k] <= fit_radius)
      sign += wq[k] * r[k] * std::abs(out.profile.amplitudes[k]) *
              (out.profile.amplitudes[k] * std::polar(1.0, 2.0 * phase)).real();
  if (sign < 0.0) phase += 0.5 * pi;
  out.phase = std::remainder(phase, pi);
  if (out.phase <= -0.5 * pi) out.phase += pi;
  return out;
}

double profile_cosine(const RadialModeProfile& a, double phase, const RadialModeProfile& b,
                      double r_max) {
  require(a.grid && b.grid, "profile_cosine: missing grid");
  const auto& r = a.grid->nodes();
  const auto& w = a.grid->weights();
  const bool same = a.grid == b.grid;
  double ab = 0.0, aa = 0.0, bb = 0.0;
  const Complex rot = std::polar(1.0, 2.0 * phase);
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r[k] > r_max) continue;
    const double x = (a.amplitudes[k] * rot).real();
    const double y = same ? b.amplitudes[k].real() : b.grid->evaluate(b.amplitudes, r[k]).real();
    ab += w[k] * r[k] * x * y;
    aa += w[k] * r[k] * x * x;
    bb += w[k] * r[k] * y * y;
  }
  require(aa > 0.0 && bb > 0.0, "profile_cosine: zero profile");
  return ab / std::sqrt(aa * bb);
}

}  // namespace vlab
