#pragma once

#include "vlab/grid.hpp"

namespace vlab {

// xi = (x - x0) / sqrt(nu (t + t0)), tau = log((t + t0) / T).
struct RescaledFrame {
  Vec2 x0{};
  double t0 = 1.0;
  double T = 1.0;

  void validate() const;
};

struct SelfSimilarField {
  ScalarField2D w;
  double tau = 0.0;
  std::size_t outside = 0;  // target points outside the source box (set to zero)
  bool truncated = false;
};

// Native map: the physical grid read in xi coordinates, w = (t + t0) omega.
// Exact (no interpolation); the xi box shrinks as t grows.
SelfSimilarField to_selfsimilar(const ScalarField2D& omega, double t, double nu,
                                const RescaledFrame& frame);

// Spectral interpolation of (t + t0) omega(x0 + xi sqrt(nu (t + t0))) onto xi_grid.
SelfSimilarField to_selfsimilar(const ScalarField2D& omega, double t, double nu,
                                const RescaledFrame& frame, const GridSpec& xi_grid);

// Inverse map onto x_grid at t + t0 = T e^tau.
SelfSimilarField from_selfsimilar(const ScalarField2D& w, double tau, double nu,
                                  const RescaledFrame& frame, const GridSpec& x_grid);

// exp(tau L) w0 on the same grid (coordinates read as xi): the transform of w0
// at the contracted wavenumbers e^{-tau/2} k, times exp(-(1 - e^{-tau}) |k|^2).
ScalarField2D semigroup_L(const ScalarField2D& w0, double tau);

struct EntropyResult {
  double value = 0.0;
  double clipped_mass = 0.0;  // |w| h^2 summed over clipped points
};

// H(w) = int w log(w / G). Nonpositive samples are clipped to 1e-300 where
// G < 1e-30 or |w| <= 1e-13 max|w| (FFT round-off floor); elsewhere they are rejected.
EntropyResult relative_entropy(const ScalarField2D& w);

// D(w) = int |grad w + (xi / 2) w|^2 / w over samples with w >= 1e-10 max w.
double entropy_dissipation(const ScalarField2D& w);

}  // namespace vlab
