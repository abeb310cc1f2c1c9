#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vlab/analytics.hpp"
#include "vlab/fields.hpp"
#include "vlab/grid.hpp"

using namespace vlab;

namespace {

// |v^G| at |xi| = 2: (1 - e^{-1}) / (4 pi).
constexpr double vg_at_2 = 0.0503025557837880875;
// Pseudo-energy of the unit Gaussian vortex at nu t = 1, d = 1:
// -(log 8 - euler_gamma) / (8 pi), from the distribution of |x - y|.
constexpr double gaussian_energy_d1 = -0.0597716684824558499;

ScalarField2D oseen(const GridSpec& g, double gamma, double nut, Vec2 x0 = {}) {
  return ScalarField2D::sample(g, [&](Vec2 x) { return gamma / nut * gaussian((x - x0) / std::sqrt(nut)); });
}

ScalarField2D random_field(const GridSpec& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(g.size());
  for (double& x : v) x = u(rng);
  return ScalarField2D(g, std::move(v));
}

}  // namespace

TEST(GridSpec, RejectsInvalidSizes) {
  EXPECT_THROW(GridSpec(8, 1.0), InvalidInput);
  EXPECT_THROW(GridSpec(48, 1.0), InvalidInput);
  EXPECT_THROW(GridSpec(64, 0.0), InvalidInput);
  EXPECT_NO_THROW(GridSpec(16, 1.0));
  EXPECT_DOUBLE_EQ(GridSpec(64, 8.0).spacing(), 0.125);
}

TEST(ScalarField2D, RejectsNonFiniteSamplesWithIndex) {
  const GridSpec g(16, 1.0);
  std::vector<double> v(g.size(), 0.0);
  v[37] = std::nan("");
  try {
    ScalarField2D w(g, v);
    FAIL() << "expected InvalidInput";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("i=5, j=2"), std::string::npos) << e.what();
  }
}

TEST(ScalarField2D, SpectralRoundtrip) {
  const GridSpec g(64, 3.0);
  const ScalarField2D w = random_field(g, 7);
  const ScalarField2D back = ScalarField2D::from_spectral(g, w.spectral());
  EXPECT_LE((back - w).max_abs(), 1e-12 * w.max_abs());
}

TEST(BiotSavart, OseenSpeedAtDistanceTwo) {
  const GridSpec g(256, 40.0);
  const ScalarField2D w = oseen(g, 1.0, 1.0);
  const VectorField2D u = biot_savart(w, BiotSavart::FreeSpace);
  // Node (n/2 + k, n/2) sits at distance k h; h = 0.15625 so distance 2 is off-grid.
  const std::vector<Vec2> p{{2.0, 0.0}, {0.0, -2.0}, {std::sqrt(2.0), std::sqrt(2.0)}};
  const ScalarField2D ux(g, u.u), uy(g, u.v);
  const auto ix = interpolate_points(ux, p), iy = interpolate_points(uy, p);
  for (std::size_t k = 0; k < p.size(); ++k)
    EXPECT_NEAR(std::hypot(ix.values[k], iy.values[k]) / vg_at_2, 1.0, 1e-4);
}

TEST(BiotSavart, ZeroInZeroOut) {
  const GridSpec g(32, 2.0);
  const VectorField2D u = biot_savart(ScalarField2D(g));
  EXPECT_EQ(u.max_norm(), 0.0);
}

TEST(BiotSavart, DivergenceFreeAndAzimuthal) {
  const GridSpec g(128, 20.0);
  const ScalarField2D w = oseen(g, 1.0, 1.0);
  const VectorField2D periodic = biot_savart(w);
  EXPECT_LE(spectral_divergence_max(periodic), 1e-10 * periodic.max_norm());
  // The periodic images break the symmetry; the free-space kernel keeps it.
  const VectorField2D u = biot_savart(w, BiotSavart::FreeSpace);
  const double umax = u.max_norm();
  double radial = 0.0;
  for (int j = 0; j < g.n_points; ++j)
    for (int i = 0; i < g.n_points; ++i) {
      const Vec2 x = g.point(i, j);
      const std::size_t k = static_cast<std::size_t>(j) * g.n_points + i;
      if (norm(x) == 0.0) continue;
      radial = std::max(radial, std::abs(dot(x, {u.u[k], u.v[k]})) / norm(x));
    }
  EXPECT_LE(radial, 1e-8 * umax);
}

TEST(BiotSavart, ZeroCirculationPairHasNoCirculationOnLargeCircle) {
  const GridSpec g(256, 40.0);
  const ScalarField2D w = oseen(g, 1.0, 1.0, {-2.0, 0.0}) - oseen(g, 1.0, 1.0, {2.0, 0.0});
  const VectorField2D u = biot_savart(w);
  const ScalarField2D ux(g, u.u), uy(g, u.v);
  const int m = 512;
  const double R = 40.0 / 3.0;
  std::vector<Vec2> p;
  for (int k = 0; k < m; ++k) p.push_back(R * Vec2{std::cos(2 * pi * k / m), std::sin(2 * pi * k / m)});
  const auto ix = interpolate_points(ux, p), iy = interpolate_points(uy, p);
  double circ = 0.0;
  for (int k = 0; k < m; ++k)
    circ += dot({ix.values[k], iy.values[k]}, perp(p[k] / R)) * R * 2 * pi / m;
  EXPECT_LE(std::abs(circ), 1e-6);
}

TEST(Moments, OseenVortex) {
  const GridSpec g(256, 40.0);
  const Moments m = moments(oseen(g, 2.0, 1.0));
  EXPECT_NEAR(m.gamma, 2.0, 1e-10);
  EXPECT_NEAR(m.m1.x, 0.0, 1e-10);
  EXPECT_NEAR(m.m1.y, 0.0, 1e-10);
  // int |xi|^2 G = 4
  EXPECT_NEAR(moments(oseen(g, 1.0, 1.0)).m2, 4.0, 1e-8);
}

TEST(Moments, Linear) {
  const GridSpec g(32, 5.0);
  const ScalarField2D a = random_field(g, 1), b = random_field(g, 2);
  const Moments ma = moments(a), mb = moments(b), mab = moments(a + 3.0 * b);
  EXPECT_NEAR(mab.gamma, ma.gamma + 3 * mb.gamma, 1e-12);
  EXPECT_NEAR(mab.m1.x, ma.m1.x + 3 * mb.m1.x, 1e-12);
  EXPECT_NEAR(mab.m2, ma.m2 + 3 * mb.m2, 1e-11);
}

TEST(PseudoEnergy, IndependentOfDForZeroCirculation) {
  const GridSpec g(256, 40.0);
  const ScalarField2D w = oseen(g, 1.0, 1.0, {-2.0, 0.0}) - oseen(g, 1.0, 1.0, {2.0, 0.0});
  const double e1 = pseudo_energy(w, 1.0), e10 = pseudo_energy(w, 10.0);
  EXPECT_NEAR(e1, e10, 1e-10 * std::abs(e1));
}

TEST(PseudoEnergy, ZeroAndInvalidD) {
  const GridSpec g(32, 4.0);
  EXPECT_EQ(pseudo_energy(ScalarField2D(g), 1.0), 0.0);
  EXPECT_THROW(pseudo_energy(ScalarField2D(g), 0.0), InvalidInput);
}

TEST(PseudoEnergy, UnitGaussianMatchesClosedForm) {
  const GridSpec g(256, 40.0);
  EXPECT_NEAR(pseudo_energy(oseen(g, 1.0, 1.0), 1.0) / gaussian_energy_d1, 1.0, 1e-3);
}

TEST(WeightedNorm, GaussianAndDerivative) {
  const GridSpec g(256, 40.0);
  const ScalarField2D G = ScalarField2D::sample(g, gaussian);
  EXPECT_NEAR(weighted_norm(G, NormKind::x()).value, 1.0, 1e-10);
  EXPECT_NEAR(weighted_norm(G, NormKind::lp(1)).value, 1.0, 1e-10);
  const ScalarField2D d1 = ScalarField2D::sample(g, [](Vec2 xi) { return -0.5 * xi.x * gaussian(xi); });
  const double n = weighted_norm(d1, NormKind::x()).value;
  EXPECT_NEAR(n * n, 0.5, 1e-8);
  EXPECT_FALSE(weighted_norm(d1, NormKind::x()).truncated);
}

TEST(WeightedNorm, FlagsHeavyTails) {
  const GridSpec g(128, 80.0);
  const ScalarField2D w = ScalarField2D::sample(g, [](Vec2 xi) { return std::exp(-0.1 * norm2(xi)); });
  EXPECT_TRUE(weighted_norm(w, NormKind::x()).truncated);
}

TEST(WeightedNorm, LpOfConstant) {
  const GridSpec g(32, 2.0);
  const ScalarField2D w = ScalarField2D::sample(g, [](Vec2) { return 3.0; });
  EXPECT_NEAR(weighted_norm(w, NormKind::lp(2)).value, 6.0, 1e-12);
  EXPECT_NEAR(weighted_norm(w, NormKind::lp(INFINITY)).value, 3.0, 1e-15);
}

TEST(ProjectSubspace, Examples) {
  const GridSpec g(256, 40.0);
  const ScalarField2D G = ScalarField2D::sample(g, gaussian);
  EXPECT_LE(project_subspace(G, Subspace::X0).max_abs(), 1e-12 * G.max_abs());
  const ScalarField2D d1 = ScalarField2D::sample(g, [](Vec2 xi) { return -0.5 * xi.x * gaussian(xi); });
  EXPECT_LE((project_subspace(d1, Subspace::X0) - d1).max_abs(), 1e-12 * d1.max_abs());
}

TEST(ProjectSubspace, KillsMomentsAndIsIdempotent) {
  const GridSpec g(256, 40.0);
  const ScalarField2D w = ScalarField2D::sample(g, [](Vec2 xi) {
    return (1.0 + xi.x + 0.3 * xi.y + 0.2 * xi.x * xi.y + 0.1 * norm2(xi)) * gaussian(xi);
  });
  for (Subspace s : {Subspace::X0, Subspace::X1, Subspace::X2}) {
    const ScalarField2D p = project_subspace(w, s);
    const Moments m = moments(p);
    EXPECT_LE(std::abs(m.gamma), 1e-10);
    if (s != Subspace::X0) {
      EXPECT_LE(std::abs(m.m1.x), 1e-10);
      EXPECT_LE(std::abs(m.m1.y), 1e-10);
    }
    if (s == Subspace::X2) {
      EXPECT_LE(std::abs(m.m2), 1e-10);
    }
    EXPECT_LE((project_subspace(p, s) - p).max_abs(), 1e-12 * w.max_abs());
  }
}

TEST(Spectral, DerivativeAndInterpolationOfTrigPolynomial) {
  const GridSpec g(32, 2 * pi);
  auto f = [](Vec2 x) { return std::sin(2 * x.x) * std::cos(3 * x.y); };
  const ScalarField2D w = ScalarField2D::sample(g, f);
  const ScalarField2D dx = derivative(w, 0);
  double err = 0.0;
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i) {
      const Vec2 x = g.point(i, j);
      err = std::max(err, std::abs(dx(i, j) - 2 * std::cos(2 * x.x) * std::cos(3 * x.y)));
    }
  EXPECT_LE(err, 1e-12);
  const std::vector<Vec2> p{{0.3, -1.1}, {2.0, 0.7}};
  const auto in = interpolate_points(w, p);
  for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(in.values[k], f(p[k]), 1e-12);
  EXPECT_EQ(in.outside, 0u);
}

TEST(Spectral, DealiasRemovesHighModes) {
  const GridSpec g(32, 2 * pi);
  const ScalarField2D hi = ScalarField2D::sample(g, [](Vec2 x) { return std::cos(14 * x.x); });
  const ScalarField2D lo = ScalarField2D::sample(g, [](Vec2 x) { return std::cos(5 * x.x); });
  EXPECT_LE(dealias(hi).max_abs(), 1e-14);
  EXPECT_LE((dealias(lo) - lo).max_abs(), 1e-14);
}
