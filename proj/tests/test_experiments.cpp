#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vlab/analytics.hpp"
#include "vlab/experiments.hpp"
#include "vlab/fit.hpp"

using namespace vlab;

TEST(FitScaling, ExactPowerLaws) {
  const std::vector<double> x{1, 2, 4, 8};
  const ScalingFit id = fit_scaling(x, x);
  EXPECT_NEAR(id.slope, 1.0, 1e-14);
  EXPECT_NEAR(id.r2, 1.0, 1e-14);
  std::vector<double> y;
  for (double v : x) y.push_back(3 * v * v);
  const ScalingFit q = fit_scaling(x, y);
  EXPECT_NEAR(q.slope, 2.0, 1e-14);
  EXPECT_NEAR(q.intercept, std::log(3.0), 1e-14);
  EXPECT_EQ(q.points, 4u);
}

TEST(FitScaling, JitteredPowerLawCoversSlope) {
  std::mt19937 rng(11);
  std::normal_distribution<double> nd(0.0, 0.01);
  std::vector<double> x, y;
  for (int k = 0; k < 20; ++k) {
    x.push_back(std::pow(2.0, k / 4.0));
    y.push_back(std::pow(x.back(), 1.5) * std::exp(nd(rng)));
  }
  const ScalingFit f = fit_scaling(x, y);
  EXPECT_LE(std::abs(f.slope - 1.5), f.slope_ci95);
  EXPECT_GT(f.r2, 0.999);
}

TEST(FitScaling, RejectsBadInput) {
  const std::vector<double> two{1, 2}, neg{1, -2, 3}, pos{1, 2, 3};
  EXPECT_THROW(fit_scaling(two, two), InvalidInput);
  EXPECT_THROW(fit_scaling(pos, neg), InvalidInput);
}

TEST(ExperimentConfig, ParsesIdsAndDefaults) {
  EXPECT_EQ(parse_experiment_id("E3"), ExperimentId::Theorem4Scaling);
  EXPECT_EQ(parse_experiment_id("E5-bounds-sweep"), ExperimentId::BoundsSweep);
  EXPECT_THROW(parse_experiment_id("E9"), InvalidInput);

  const ExperimentConfig c = parse_experiment_config(R"({"experiment":"E3","pair":{"nus":[0.002]}})");
  EXPECT_EQ(c.id, ExperimentId::Theorem4Scaling);
  ASSERT_EQ(c.pair.nus.size(), 1u);
  EXPECT_EQ(c.pair.nus[0], 0.002);
  EXPECT_EQ(c.pair.n_points, ExperimentConfig::defaults(ExperimentId::Theorem4Scaling).pair.n_points);

  const ExperimentConfig e4 = parse_experiment_config(R"({"experiment":"E4"})");
  EXPECT_GT(e4.pair.n_points, c.pair.n_points);
}

TEST(ExperimentConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_experiment_config(R"({"experiment":"E1","colour":1})"), InvalidInput);
  EXPECT_THROW(parse_experiment_config(R"({"experiment":"E1","convergence":{"nx":64}})"), InvalidInput);
  EXPECT_THROW(parse_experiment_config(R"({"experiment":"E3","pair":{"nus":[-1]}})"), InvalidInput);
  EXPECT_THROW(parse_experiment_config("{"), InvalidInput);
}

TEST(ExperimentConfig, JsonRoundtrip) {
  ExperimentConfig c = ExperimentConfig::defaults(ExperimentId::PerturbationDecay);
  c.perturbation.alphas = {2.0};
  c.seed = 42;
  const ExperimentConfig back = parse_experiment_config(config_to_json(c));
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.perturbation.alphas, std::vector<double>{2.0});
}

TEST(Theorem4Error, SingleOseenVortexIsExact) {
  const double nu = 1e-3, t0 = 1.0;
  const VortexConfiguration c0({{0.1, -0.2}}, {1.0});
  // The periodic images leave an O((nu t / L^2)^2) residual.
  SolverConfig cfg;
  cfg.grid = GridSpec(256, 4.0);
  cfg.nu = nu;
  cfg.t0 = t0;
  cfg.t_end = 2.0;
  cfg.dt = 2e-3;
  cfg.snapshot_times = {1.5, 2.0};
  const RunResult r = run(cfg, c0);
  ASSERT_FALSE(r.aborted);
  const Trajectory traj = trajectory_at(Rhs::periodic(4.0), c0, {1.0, 1.5, 2.0}, 1e-3);
  for (double e : theorem4_error(r.snapshots, traj, nu)) EXPECT_LE(e, 5e-6);
}

TEST(Theorem4Error, RejectsTimesOffTheTrajectory) {
  const VortexConfiguration c0({{0, 0}}, {1.0});
  const GridSpec g(32, 2.0);
  const Trajectory traj = trajectory_at(Rhs::pw(), c0, {1.0, 2.0}, 0.1);
  const std::vector<Snapshot> snaps{{1.7, superposition(c0, 1e-2, 1.7, g)}};
  EXPECT_THROW(theorem4_error(snaps, traj, 1e-2), InvalidInput);
}

TEST(DeformationExtract, SingleVortexHasNoModeTwo) {
  const double nu = 1e-3, t = 2.0;
  const VortexConfiguration c({{0.05, 0.0}}, {1.0});
  const GridSpec g(256, 2.0);
  const Snapshot s{t, superposition(c, nu, t, g)};
  auto radii = std::make_shared<const RadialGrid>(RadialGrid::from_edges({0, 2, 4, 6, 8}, 8));
  const DeformationExtraction d = deformation_extract(s, 0, c, nu, radii);
  EXPECT_LE(d.amplitude_max, 1e-8);
  EXPECT_EQ(d.outside, 0u);
}

TEST(ProfileCosine, IdenticalAndOrthogonal) {
  auto grid = std::make_shared<const RadialGrid>(RadialGrid::from_edges({0, 2, 4, 6}, 8));
  RadialModeProfile a{grid, 2, {}}, b{grid, 2, {}}, c{grid, 2, {}};
  for (double r : grid->nodes()) {
    const double f = r * r * std::exp(-r * r / 4);
    a.amplitudes.push_back(std::polar(f, -2 * 0.3));
    b.amplitudes.push_back(f);
    c.amplitudes.push_back(f * (r - 2.5));
  }
  EXPECT_NEAR(profile_cosine(a, 0.3, b, 6.0), 1.0, 1e-12);
  EXPECT_LT(std::abs(profile_cosine(b, 0.0, c, 6.0)), 0.5);
}
