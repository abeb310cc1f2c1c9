#pragma once

#include "vlab/grid.hpp"
#include "vlab/point_vortex.hpp"
#include "vlab/types.hpp"

namespace vlab {

struct GaussianProfile {
  double G = 0.0;  // exp(-|xi|^2/4) / (4 pi)
  Vec2 vG{};       // xi^perp / (2 pi |xi|^2) (1 - exp(-|xi|^2/4))
};

GaussianProfile gaussian_profile(Vec2 xi);

inline double gaussian(Vec2 xi) { return std::exp(-0.25 * norm2(xi)) / (4.0 * pi); }

struct OseenSample {
  double omega = 0.0;
  Vec2 u{};
};

OseenSample oseen_fields(double gamma, double nu, double t, Vec2 x0, Vec2 x);

// Sum of Oseen vortices centred at c.positions. Each centre is seen through its
// nearest periodic image on the grid's box.
ScalarField2D superposition(const VortexConfiguration& c, double nu, double t,
                            const GridSpec& grid);

struct PhiG {
  double phi = 0.0;  // (1 - exp(-r^2/4)) / (2 pi r^2), phi(0) = 1/(8 pi)
  double g = 0.0;    // exp(-r^2/4) / (4 pi)
};

PhiG phi_g(double r);

}  // namespace vlab
