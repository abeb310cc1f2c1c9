#pragma once

#include <span>
#include <vector>

#include "vlab/grid.hpp"

namespace vlab {

// Periodic: velocity of the box with the stream-function mean mode removed, so a
// nonzero circulation sees a compensating uniform background of -gamma/L^2.
// FreeSpace: whole-plane Biot-Savart of the gridded vorticity, evaluated with a
// truncated log kernel on a zero-padded grid (spectrally accurate; no images).
enum class BiotSavart { Periodic, FreeSpace };

VectorField2D biot_savart(const ScalarField2D& w, BiotSavart kind = BiotSavart::Periodic);

struct Moments {
  double gamma = 0.0;  // sum w h^2
  Vec2 m1{};           // sum x w h^2
  double m2 = 0.0;     // sum |x - origin|^2 w h^2
};

Moments moments(const ScalarField2D& w);

// (1/4pi) iint log(d/|x-y|) w(x) w(y), from the box Green's function with its
// regular part at the origin removed analytically.
double pseudo_energy(const ScalarField2D& w, double d);

// Constant c_L in G_box(x) = -(1/2pi) log|x| + c_L + |x|^2/(4L^2) + O(|x|^4/L^4),
// where -Delta G_box = delta - 1/L^2 on the square torus of side L.
double box_green_constant(double L);

struct NormKind {
  enum class Type { X, XBeta, Lp };
  Type type = Type::X;
  double param = 0.0;

  static NormKind x() { return {Type::X, 0.0}; }
  static NormKind x_beta(double beta) { return {Type::XBeta, beta}; }
  static NormKind lp(double p) { return {Type::Lp, p}; }
};

struct NormResult {
  double value = 0.0;
  // Set when the outermost grid ring carries more than 1e-8 of the total or when
  // weights overflowed and their terms were dropped.
  bool truncated = false;
};

// Grid coordinates are read as the rescaled variable xi.
NormResult weighted_norm(const ScalarField2D& w, NormKind kind);

// X inner product int G^{-1} a b d(xi) with log-space weights.
double x_inner(const ScalarField2D& a, const ScalarField2D& b);

enum class Subspace { X0, X1, X2 };

// Removes the components along G, then d1 G and d2 G, then Delta G. Grid
// coordinates are read as xi.
ScalarField2D project_subspace(const ScalarField2D& w, Subspace target);

// Spectral partial derivative along axis 0 (x) or 1 (y).
ScalarField2D derivative(const ScalarField2D& w, int axis);

// Max magnitude of the spectral divergence of a periodic vector field.
double spectral_divergence_max(const VectorField2D& u);

// Zeroes every coefficient with |k_x| or |k_y| above 2/3 of the Nyquist index.
ScalarField2D dealias(const ScalarField2D& w);

// Trigonometric interpolant of w on the tensor grid xs x ys (row-major in ys).
// Targets outside the box are wrapped periodically and counted in `outside`.
struct Interpolated {
  std::vector<double> values;
  std::size_t outside = 0;
};
Interpolated interpolate(const ScalarField2D& w, std::span<const double> xs,
                         std::span<const double> ys);

// Trigonometric interpolant of w at scattered points (cost n^2 / 2 per point).
Interpolated interpolate_points(const ScalarField2D& w, std::span<const Vec2> points);

}  // namespace vlab
