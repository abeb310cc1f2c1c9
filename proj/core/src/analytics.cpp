#include "vlab/analytics.hpp"

namespace vlab {

GaussianProfile gaussian_profile(Vec2 xi) {
  const double r2 = norm2(xi);
  GaussianProfile p;
  p.G = std::exp(-0.25 * r2) / (4.0 * pi);
  if (r2 > 0.0) p.vG = (-std::expm1(-0.25 * r2) / (2.0 * pi * r2)) * perp(xi);
  return p;
}

OseenSample oseen_fields(double gamma, double nu, double t, Vec2 x0, Vec2 x) {
  require(nu > 0.0, "oseen_fields: nu must be positive");
  require(t > 0.0, "oseen_fields: t must be positive");
  const double s = std::sqrt(nu * t);
  const auto p = gaussian_profile((x - x0) / s);
  return {gamma / (nu * t) * p.G, (gamma / s) * p.vG};
}

ScalarField2D superposition(const VortexConfiguration& c, double nu, double t,
                            const GridSpec& grid) {
  require(nu > 0.0 && t > 0.0, "superposition: nu and t must be positive");
  const double L = grid.box_length;
  const double s2 = nu * t;
  return ScalarField2D::sample(grid, [&](Vec2 x) {
    double w = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      Vec2 z = x - c.positions[i];
      z.x -= L * std::round(z.x / L);
      z.y -= L * std::round(z.y / L);
      w += c.circulations[i] / s2 * std::exp(-0.25 * norm2(z) / s2) / (4.0 * pi);
    }
    return w;
  });
}

PhiG phi_g(double r) {
  require(r >= 0.0, "phi_g: r must be nonnegative");
  const double r2 = r * r;
  PhiG out;
  out.g = std::exp(-0.25 * r2) / (4.0 * pi);
  if (r < 1e-4)
    out.phi = (1.0 - r2 / 8.0) / (8.0 * pi);
  else
    out.phi = -std::expm1(-0.25 * r2) / (2.0 * pi * r2);
  return out;
}

}  // namespace vlab
