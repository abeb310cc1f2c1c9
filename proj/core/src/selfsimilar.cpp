#include "vlab/selfsimilar.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <string>

#include "vlab/analytics.hpp"
#include "vlab/fft.hpp"
#include "vlab/fields.hpp"

namespace vlab {
namespace {

using Complex = std::complex<double>;

// Tensor interpolation that zeroes targets outside the source box instead of
// wrapping them.
SelfSimilarField interpolate_zero_outside(const ScalarField2D& src, std::vector<double> xs,
                                          std::vector<double> ys, const GridSpec& target,
                                          double scale) {
  const GridSpec& g = src.grid();
  const Vec2 lo = g.point(0, 0);
  auto inside = [&](double v, double l) { return v >= l && v < l + g.box_length; };
  std::vector<std::size_t> ix, iy;
  std::vector<double> sx, sy;
  for (std::size_t k = 0; k < xs.size(); ++k)
    if (inside(xs[k], lo.x)) {
      ix.push_back(k);
      sx.push_back(xs[k]);
    }
  for (std::size_t k = 0; k < ys.size(); ++k)
    if (inside(ys[k], lo.y)) {
      iy.push_back(k);
      sy.push_back(ys[k]);
    }
  std::vector<double> out(target.size(), 0.0);
  if (!sx.empty() && !sy.empty()) {
    const Interpolated v = interpolate(src, sx, sy);
    for (std::size_t b = 0; b < iy.size(); ++b)
      for (std::size_t a = 0; a < ix.size(); ++a)
        out[iy[b] * xs.size() + ix[a]] = scale * v.values[b * sx.size() + a];
  }
  SelfSimilarField r;
  r.outside = xs.size() * ys.size() - ix.size() * iy.size();
  r.truncated = r.outside > 0;
  r.w = ScalarField2D(target, std::move(out));
  return r;
}

void check_positive(const ScalarField2D& w, double floor_rel, std::vector<char>& clip,
                    double& clipped_mass) {
  const GridSpec& g = w.grid();
  const double mx = w.max_abs();
  const double a = g.spacing() * g.spacing();
  clip.assign(g.size(), 0);
  clipped_mass = 0.0;
  for (int j = 0; j < g.n_points; ++j)
    for (int i = 0; i < g.n_points; ++i) {
      const double v = w(i, j);
      if (v > 0.0) continue;
      const double G = gaussian(g.point(i, j));
      if (G < 1e-30 || std::abs(v) <= floor_rel * mx) {
        clip[static_cast<std::size_t>(j) * g.n_points + i] = 1;
        clipped_mass += std::abs(v) * a;
        continue;
      }
      std::ostringstream msg;
      msg << "relative entropy: nonpositive sample " << v << " at (" << i << ", " << j
          << ") where G = " << G << " and max|w| = " << mx;
      throw InvalidInput(msg.str());
    }
}

}  // namespace

void RescaledFrame::validate() const {
  require(t0 > 0.0, "RescaledFrame: t0 must be positive");
  require(T > 0.0, "RescaledFrame: T must be positive");
}

SelfSimilarField to_selfsimilar(const ScalarField2D& omega, double t, double nu,
                                const RescaledFrame& frame) {
  frame.validate();
  require(nu > 0.0, "to_selfsimilar: nu must be positive");
  const double s = t + frame.t0;
  require(s > 0.0, "to_selfsimilar: t + t0 must be positive");
  const double sigma = std::sqrt(nu * s);
  const GridSpec& g = omega.grid();
  const GridSpec xg(g.n_points, g.box_length / sigma, (g.origin - frame.x0) / sigma);
  std::vector<double> v(omega.values().begin(), omega.values().end());
  for (double& x : v) x *= s;
  SelfSimilarField r;
  r.w = ScalarField2D(xg, std::move(v));
  r.tau = std::log(s / frame.T);
  return r;
}

SelfSimilarField to_selfsimilar(const ScalarField2D& omega, double t, double nu,
                                const RescaledFrame& frame, const GridSpec& xi_grid) {
  frame.validate();
  require(nu > 0.0, "to_selfsimilar: nu must be positive");
  const double s = t + frame.t0;
  require(s > 0.0, "to_selfsimilar: t + t0 must be positive");
  const double sigma = std::sqrt(nu * s);
  std::vector<double> xs, ys;
  for (int i = 0; i < xi_grid.n_points; ++i) {
    const Vec2 p = xi_grid.point(i, i);
    xs.push_back(frame.x0.x + sigma * p.x);
    ys.push_back(frame.x0.y + sigma * p.y);
  }
  SelfSimilarField r = interpolate_zero_outside(omega, xs, ys, xi_grid, s);
  r.tau = std::log(s / frame.T);
  return r;
}

SelfSimilarField from_selfsimilar(const ScalarField2D& w, double tau, double nu,
                                  const RescaledFrame& frame, const GridSpec& x_grid) {
  frame.validate();
  require(nu > 0.0, "from_selfsimilar: nu must be positive");
  const double s = frame.T * std::exp(tau);
  const double sigma = std::sqrt(nu * s);
  std::vector<double> xs, ys;
  for (int i = 0; i < x_grid.n_points; ++i) {
    const Vec2 p = x_grid.point(i, i);
    xs.push_back((p.x - frame.x0.x) / sigma);
    ys.push_back((p.y - frame.x0.y) / sigma);
  }
  SelfSimilarField r = interpolate_zero_outside(w, xs, ys, x_grid, 1.0 / s);
  r.tau = tau;
  return r;
}

ScalarField2D semigroup_L(const ScalarField2D& w0, double tau) {
  require(tau >= 0.0, "semigroup_L: tau must be nonnegative");
  if (tau == 0.0) return w0;
  const GridSpec& g = w0.grid();
  const int n = g.n_points;
  const int nc = n / 2 + 1;
  const double q = std::exp(-0.5 * tau);
  const double a = -std::expm1(-tau);
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = g.point(i, 0).x;
    y[i] = g.point(0, i).y;
  }
  // Row transforms at contracted x-wavenumbers, then columns at contracted y-wavenumbers.
  std::vector<Complex> ex(static_cast<std::size_t>(nc) * n), ey(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < nc; ++k)
    for (int i = 0; i < n; ++i) ex[static_cast<std::size_t>(k) * n + i] = std::polar(1.0, -q * g.wavenumber(k) * x[i]);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) ey[static_cast<std::size_t>(k) * n + j] = std::polar(1.0, -q * g.wavenumber(k) * y[j]);
  std::vector<Complex> rows(static_cast<std::size_t>(n) * nc);
  auto vals = w0.values();
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < nc; ++k) {
      Complex s = 0.0;
      const Complex* e = &ex[static_cast<std::size_t>(k) * n];
      const double* row = &vals[static_cast<std::size_t>(j) * n];
      for (int i = 0; i < n; ++i) s += row[i] * e[i];
      rows[static_cast<std::size_t>(j) * nc + k] = s;
    }
  std::vector<Complex> spec(static_cast<std::size_t>(n) * nc, 0.0);
  const Vec2 corner = g.point(0, 0);
  for (int ky = 0; ky < n; ++ky) {
    if (ky == n / 2) continue;
    const double kyv = g.wavenumber(ky);
    for (int kx = 0; kx < nc; ++kx) {
      if (kx == n / 2) continue;
      const double kxv = g.wavenumber(kx);
      Complex s = 0.0;
      const Complex* e = &ey[static_cast<std::size_t>(ky) * n];
      for (int j = 0; j < n; ++j) s += rows[static_cast<std::size_t>(j) * nc + kx] * e[j];
      spec[static_cast<std::size_t>(ky) * nc + kx] =
          s * std::exp(-a * (kxv * kxv + kyv * kyv)) *
          std::polar(1.0, kxv * corner.x + kyv * corner.y);
    }
  }
  return ScalarField2D::from_spectral(g, std::move(spec));
}

EntropyResult relative_entropy(const ScalarField2D& w) {
  std::vector<char> clip;
  EntropyResult r;
  check_positive(w, 1e-13, clip, r.clipped_mass);
  const GridSpec& g = w.grid();
  const double a = g.spacing() * g.spacing();
  const double log4pi = std::log(4 * pi);
  double s = 0.0;
  for (int j = 0; j < g.n_points; ++j)
    for (int i = 0; i < g.n_points; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * g.n_points + i;
      const double v = clip[k] ? 1e-300 : w(i, j);
      const double logG = -0.25 * norm2(g.point(i, j)) - log4pi;
      s += v * (std::log(v) - logG);
    }
  r.value = s * a;
  return r;
}

double entropy_dissipation(const ScalarField2D& w) {
  std::vector<char> clip;
  double clipped = 0.0;
  check_positive(w, 1e-13, clip, clipped);
  const GridSpec& g = w.grid();
  const ScalarField2D wx = derivative(w, 0);
  const ScalarField2D wy = derivative(w, 1);
  double mx = 0.0;
  for (double v : w.values()) mx = std::max(mx, v);
  const double floor = 1e-10 * mx;
  double s = 0.0;
  for (int j = 0; j < g.n_points; ++j)
    for (int i = 0; i < g.n_points; ++i) {
      const double v = w(i, j);
      if (v < floor) continue;
      const Vec2 xi = g.point(i, j);
      const double fx = wx(i, j) + 0.5 * xi.x * v;
      const double fy = wy(i, j) + 0.5 * xi.y * v;
      s += (fx * fx + fy * fy) / v;
    }
  return s * g.spacing() * g.spacing();
}

}  // namespace vlab
