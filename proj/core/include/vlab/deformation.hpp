#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "vlab/grid.hpp"
#include "vlab/point_vortex.hpp"
#include "vlab/radial.hpp"

namespace vlab {

// Leading strain fields felt by vortex i, sampled on a grid read as xi:
// A_i quadratic, B_i cubic and C_i quartic polynomials in xi times G(xi).
struct StrainProfiles {
  ScalarField2D A, B, C;
};

StrainProfiles strain_profiles(std::size_t i, const VortexConfiguration& c, double d,
                               const GridSpec& xi_grid);

// Mode-2 amplitude a(r) of A_i, in the convention A_i = Re(a(r) e^{2 i theta}).
RadialModeProfile strain_mode2(std::size_t i, const VortexConfiguration& c, double d,
                               std::shared_ptr<const RadialGrid> grid);

struct DeformationSolve {
  RadialModeProfile solution;  // f with Lambda_n f = -a
  double residual = 0.0;       // ||Lambda_n f + a||_X / ||a||_X
  double condition = 0.0;      // of the conjugated real operator phi - g Omega_n
  bool minimum_norm = false;   // pseudo-inverse branch taken
};

// Solves in(phi f - g Omega_n[f]) = -a in Gaussian-conjugated coordinates. The
// default mode-2 use is Lambda F_i + A_i = 0; other modes serve B_i.
// Throws NumericalFailure when the residual exceeds 1e-6.
DeformationSolve solve_deformation(const RadialModeProfile& a);

// Real symmetric core phi - g Omega_n of Lambda_n = i n (phi - g Omega_n) on the
// nodal grid, conjugated so that the X norm is Euclidean (symmetrized).
Eigen::MatrixXd nodal_lambda_core(const RadialGrid& grid, int n);

// Lambda_n applied to a nodal profile.
RadialModeProfile apply_lambda(const RadialModeProfile& f);

// X norm of a mode profile: (pi int |a|^2 r / g dr)^{1/2} for n >= 1.
double mode_x_norm(const RadialModeProfile& a);

// Radial factor of the deformation: the real solution of
// 2 (phi w - g Omega_2[w]) = r^2 g.
struct DeformationShape {
  RadialModeProfile profile;
  double residual = 0.0;
  double origin_exponent = 0.0;  // log-log slope over the first panel
  double tail_log_slope = 0.0;   // slope of log(w / r^4) against r^2 on [5, 10]
  double c1 = 0.0;               // w ~ c1 r^2 near 0
  double c2 = 0.0;               // w ~ c2 r^4 e^{-r^2/4} on [5, 10]
};

DeformationShape deformation_shape(std::shared_ptr<const RadialGrid> grid);

struct PairStrain {
  std::size_t j = 0;
  Vec2 z_ij{};
  double ratio = 0.0;  // gamma_j / gamma_i
};

struct DeformationProfile {
  std::size_t vortex = 0;
  double d = 0.0;
  RadialModeProfile F;  // F_i = Re(F(r) e^{2 i theta})
  std::vector<PairStrain> pairs;
  DeformationSolve solve;
};

DeformationProfile deformation_profile(std::size_t i, const VortexConfiguration& c, double d,
                                       std::shared_ptr<const RadialGrid> grid);

struct ApproxProfile {
  ScalarField2D w;
  std::vector<std::string> warnings;
};

// w_i^app = G + (nu t / d^2) F_i on a grid read as xi. The radial correction is
// omitted.
ApproxProfile approx_profile(const DeformationProfile& F, double nu, double t,
                             const GridSpec& xi_grid);

// Per-pair elliptical prediction: mode-2 coefficient of w_i^app equals
// sum_j amplitude_j w(r) cos(2 (theta - theta_j)).
struct EllipseTerm {
  std::size_t j = 0;
  double amplitude = 0.0;  // (nu t / |z_ij|^2) (gamma_j / gamma_i) / (4 pi)
  double phase = 0.0;      // theta_ij
};

std::vector<EllipseTerm> wapp2_terms(std::size_t i, const VortexConfiguration& c, double nu,
                                     double t);

// Angular Fourier coefficient a(r) with w_n = Re(a(r) e^{i n theta}) around
// `centre`, sampled at centre + scale * r (cos, sin) for the nodes of `radii`.
// Radii mapping outside the box are sampled periodically and counted.
struct AngularMode {
  RadialModeProfile profile;
  std::size_t outside = 0;
};

AngularMode angular_mode(const ScalarField2D& w, Vec2 centre, double scale, int n,
                         std::shared_ptr<const RadialGrid> radii, int angles = 64);

// Orientation -arg(c_2) / 2 in (-pi/2, pi/2] of the quadrupole moment
// c_2 = sum w(x) conj(x - centre)^2, with x - centre taken as the nearest image.
double mode2_orientation(const ScalarField2D& w, Vec2 centre);

}  // namespace vlab
