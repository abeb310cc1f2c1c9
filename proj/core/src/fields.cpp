#include "vlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <utility>

#include "vlab/analytics.hpp"
#include "vlab/fft.hpp"

namespace vlab {
namespace {

using Complex = std::complex<double>;

// Multiplicity of an r2c column in a full-spectrum sum.
double column_weight(int kx, int n) { return (kx == 0 || kx == n / 2) ? 1.0 : 2.0; }

// Spectral derivative factor; the Nyquist mode has no odd derivative.
double derivative_wavenumber(const GridSpec& g, int k) {
  return k == g.n_points / 2 ? 0.0 : g.wavenumber(k);
}

template <class F>
void for_each_mode(const GridSpec& g, F&& f) {
  const int n = g.n_points;
  const int nc = n / 2 + 1;
  for (int ky = 0; ky < n; ++ky)
    for (int kx = 0; kx < nc; ++kx) f(ky, kx, static_cast<std::size_t>(ky) * nc + kx);
}

// Fourier transform of the log kernel -(1/2pi) log|x| truncated to |x| < R.
double truncated_log_kernel(double k, double R) {
  if (k * R < 1e-6) return 0.25 * R * R - 0.5 * R * R * std::log(R);
  return (1.0 - std::cyl_bessel_j(0.0, k * R)) / (k * k) -
         R * std::log(R) * std::cyl_bessel_j(1.0, k * R) / k;
}

struct FreeSpaceKernel {
  int padded = 0;
  std::vector<Complex> ku;  // i k_y Ghat
  std::vector<Complex> kv;  // -i k_x Ghat
};

const FreeSpaceKernel& free_space_kernel(int n, double h) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, FreeSpaceKernel> cache;
  std::lock_guard lock(mu);
  auto key = std::make_pair(n, h);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  // Pairwise separations inside the box are below sqrt(2) L; the padded period
  // must exceed L + R so that no wrapped copy reaches the box.
  const double L = n * h;
  const double R = std::sqrt(2.0) * L + 2.0 * h;
  int P = fft::good_size(n + static_cast<int>(std::ceil(R / h)) + 2);
  if (P % 2) P = fft::good_size(P + 1);
  FreeSpaceKernel k;
  k.padded = P;
  const int nc = P / 2 + 1;
  k.ku.resize(static_cast<std::size_t>(P) * nc);
  k.kv.resize(k.ku.size());
  const double dk = 2.0 * pi / (P * h);
  for (int jy = 0; jy < P; ++jy) {
    const double ky = dk * fft::frequency(jy, P);
    for (int jx = 0; jx < nc; ++jx) {
      const double kx = dk * jx;
      const double gh = truncated_log_kernel(std::hypot(kx, ky), R);
      const std::size_t idx = static_cast<std::size_t>(jy) * nc + jx;
      k.ku[idx] = Complex(0.0, jy == P / 2 ? 0.0 : ky) * gh;
      k.kv[idx] = Complex(0.0, jx == P / 2 ? 0.0 : -kx) * gh;
    }
  }
  return cache.emplace(key, std::move(k)).first->second;
}

VectorField2D biot_savart_free(const ScalarField2D& w) {
  const GridSpec& g = w.grid();
  const int n = g.n_points;
  const double h = g.spacing();
  const FreeSpaceKernel& k = free_space_kernel(n, h);
  const int P = k.padded;
  const int nc = P / 2 + 1;
  std::vector<double> pad(static_cast<std::size_t>(P) * P, 0.0);
  auto vals = w.values();
  for (int j = 0; j < n; ++j)
    std::copy_n(vals.begin() + static_cast<std::ptrdiff_t>(j) * n, n,
                pad.begin() + static_cast<std::ptrdiff_t>(j) * P);
  std::vector<Complex> wh(static_cast<std::size_t>(P) * nc);
  fft::forward(P, P, pad, wh);
  std::vector<Complex> tmp(wh.size());
  VectorField2D out{g, std::vector<double>(g.size()), std::vector<double>(g.size())};
  for (int comp = 0; comp < 2; ++comp) {
    const auto& kk = comp == 0 ? k.ku : k.kv;
    for (std::size_t i = 0; i < wh.size(); ++i) tmp[i] = kk[i] * wh[i];
    fft::inverse(P, P, tmp, pad);
    auto& dst = comp == 0 ? out.u : out.v;
    for (int j = 0; j < n; ++j)
      std::copy_n(pad.begin() + static_cast<std::ptrdiff_t>(j) * P, n,
                  dst.begin() + static_cast<std::ptrdiff_t>(j) * n);
  }
  return out;
}

}  // namespace

VectorField2D biot_savart(const ScalarField2D& w, BiotSavart kind) {
  if (kind == BiotSavart::FreeSpace) return biot_savart_free(w);
  const GridSpec& g = w.grid();
  const auto& wh = w.spectral();
  std::vector<Complex> uh(wh.size()), vh(wh.size());
  for_each_mode(g, [&](int ky, int kx, std::size_t idx) {
    const double kxv = g.wavenumber(kx);
    const double kyv = g.wavenumber(ky);
    const double k2 = kxv * kxv + kyv * kyv;
    if (k2 == 0.0) return;
    const Complex psi = wh[idx] / k2;  // -Delta psi = w
    uh[idx] = Complex(0.0, derivative_wavenumber(g, ky)) * psi;
    vh[idx] = -Complex(0.0, derivative_wavenumber(g, kx)) * psi;
  });
  VectorField2D out{g, std::vector<double>(g.size()), std::vector<double>(g.size())};
  fft::inverse(g.n_points, g.n_points, uh, out.u);
  fft::inverse(g.n_points, g.n_points, vh, out.v);
  return out;
}

Moments moments(const ScalarField2D& w) {
  const GridSpec& g = w.grid();
  const double a = g.spacing() * g.spacing();
  Moments m;
  for (int j = 0; j < g.n_points; ++j) {
    for (int i = 0; i < g.n_points; ++i) {
      const double v = w(i, j) * a;
      const Vec2 x = g.point(i, j);
      m.gamma += v;
      m.m1 += v * x;
      m.m2 += v * norm2(x - g.origin);
    }
  }
  return m;
}

double box_green_constant(double L) {
  require(L > 0.0, "box_green_constant: L must be positive");
  // Ewald split at a = L^2/(4 pi); both lattice sums converge like exp(-pi m^2).
  constexpr int M = 6;
  double spectral = 0.0;
  double real = 0.0;
  for (int a = -M; a <= M; ++a) {
    for (int b = -M; b <= M; ++b) {
      if (a == 0 && b == 0) continue;
      const double m2 = static_cast<double>(a * a + b * b);
      spectral += std::exp(-pi * m2) / (4.0 * pi * pi * m2);
      real += -std::expint(-pi * m2);  // E1(pi m^2)
    }
  }
  constexpr double euler_gamma = 0.57721566490153286061;
  return spectral + (std::log(L * L / pi) - euler_gamma) / (4.0 * pi) + real / (4.0 * pi) -
         1.0 / (4.0 * pi);
}

double pseudo_energy(const ScalarField2D& w, double d) {
  require(d > 0.0, "pseudo_energy: d must be positive");
  const GridSpec& g = w.grid();
  const double L = g.box_length;
  const double a = g.spacing() * g.spacing();
  const auto& wh = w.spectral();
  double box = 0.0;
  for_each_mode(g, [&](int ky, int kx, std::size_t idx) {
    const double kxv = g.wavenumber(kx);
    const double kyv = g.wavenumber(ky);
    const double k2 = kxv * kxv + kyv * kyv;
    if (k2 == 0.0) return;
    box += column_weight(kx, g.n_points) * std::norm(wh[idx] * a) / k2;
  });
  box /= 2.0 * L * L;
  const Moments m = moments(w);
  const double quad = (m.gamma * m.m2 - norm2(m.m1 - m.gamma * g.origin)) / (4.0 * L * L);
  return box - 0.5 * box_green_constant(L) * m.gamma * m.gamma - quad +
         m.gamma * m.gamma * std::log(d) / (4.0 * pi);
}

NormResult weighted_norm(const ScalarField2D& w, NormKind kind) {
  const GridSpec& g = w.grid();
  const int n = g.n_points;
  const double a = g.spacing() * g.spacing();
  NormResult res;
  if (kind.type == NormKind::Type::Lp) {
    const double p = kind.param;
    require(p >= 1.0, "weighted_norm: p must be >= 1");
    if (std::isinf(p)) {
      res.value = w.max_abs();
      return res;
    }
    double s = 0.0;
    for (double v : w.values()) s += std::pow(std::abs(v), p);
    res.value = std::pow(s * a, 1.0 / p);
    return res;
  }
  if (kind.type == NormKind::Type::XBeta)
    require(kind.param > 0.0 && kind.param < 1.0, "weighted_norm: beta must lie in (0,1)");
  const double log4pi = std::log(4.0 * pi);
  double total = 0.0;
  double ring = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double v = w(i, j);
      if (v == 0.0) continue;
      const Vec2 xi = g.point(i, j);
      const double logw = kind.type == NormKind::Type::X ? 0.25 * norm2(xi) + log4pi
                                                          : 0.25 * kind.param * norm(xi);
      const double e = 2.0 * std::log(std::abs(v)) + logw;
      if (e > 700.0) {
        res.truncated = true;
        continue;
      }
      const double t = std::exp(e) * a;
      total += t;
      if (i < 2 || j < 2 || i >= n - 2 || j >= n - 2) ring += t;
    }
  }
  if (ring > 1e-8 * total) res.truncated = true;
  res.value = std::sqrt(total);
  return res;
}

double x_inner(const ScalarField2D& a, const ScalarField2D& b) {
  require(a.grid() == b.grid(), "x_inner: grid mismatch");
  const GridSpec& g = a.grid();
  const double area = g.spacing() * g.spacing();
  const double log4pi = std::log(4.0 * pi);
  double s = 0.0;
  for (int j = 0; j < g.n_points; ++j) {
    for (int i = 0; i < g.n_points; ++i) {
      const double p = a(i, j) * b(i, j);
      if (p == 0.0) continue;
      const double e = std::log(std::abs(p)) + 0.25 * norm2(g.point(i, j)) + log4pi;
      if (e > 700.0) continue;
      s += std::copysign(std::exp(e), p);
    }
  }
  return s * area;
}

ScalarField2D project_subspace(const ScalarField2D& w, Subspace target) {
  const GridSpec& g = w.grid();
  auto G = ScalarField2D::sample(g, [](Vec2 xi) { return gaussian(xi); });
  auto sum = [&](const ScalarField2D& f, auto&& weight) {
    double s = 0.0;
    for (int j = 0; j < g.n_points; ++j)
      for (int i = 0; i < g.n_points; ++i) s += weight(g.point(i, j)) * f(i, j);
    return s;
  };
  auto one = [](Vec2) { return 1.0; };
  // Discrete normalizations make each step exact on the grid's moment functionals.
  ScalarField2D out = w;
  out -= (sum(out, one) / sum(G, one)) * G;
  if (target == Subspace::X0) return out;
  for (int axis = 0; axis < 2; ++axis) {
    auto coord = [axis](Vec2 x) { return axis == 0 ? x.x : x.y; };
    // -d_a G = (xi_a/2) G
    auto dG = ScalarField2D::sample(g, [&](Vec2 xi) { return 0.5 * coord(xi) * gaussian(xi); });
    out -= (sum(out, coord) / sum(dG, coord)) * dG;
  }
  if (target == Subspace::X1) return out;
  auto lapG =
      ScalarField2D::sample(g, [](Vec2 xi) { return (0.25 * norm2(xi) - 1.0) * gaussian(xi); });
  auto r2 = [](Vec2 x) { return norm2(x); };
  out -= (sum(out, r2) / sum(lapG, r2)) * lapG;
  return out;
}

ScalarField2D derivative(const ScalarField2D& w, int axis) {
  require(axis == 0 || axis == 1, "derivative: axis must be 0 or 1");
  const GridSpec& g = w.grid();
  const auto& wh = w.spectral();
  std::vector<Complex> out(wh.size());
  for_each_mode(g, [&](int ky, int kx, std::size_t idx) {
    const double k = derivative_wavenumber(g, axis == 0 ? kx : ky);
    out[idx] = Complex(0.0, k) * wh[idx];
  });
  return ScalarField2D::from_spectral(g, std::move(out));
}

double spectral_divergence_max(const VectorField2D& u) {
  const ScalarField2D a(u.grid, u.u);
  const ScalarField2D b(u.grid, u.v);
  const auto div = derivative(a, 0) + derivative(b, 1);
  return div.max_abs();
}

ScalarField2D dealias(const ScalarField2D& w) {
  const GridSpec& g = w.grid();
  const int cut = g.n_points / 3;
  std::vector<Complex> out = w.spectral();
  for_each_mode(g, [&](int ky, int kx, std::size_t idx) {
    if (std::abs(fft::frequency(ky, g.n_points)) > cut || kx > cut) out[idx] = 0.0;
  });
  return ScalarField2D::from_spectral(g, std::move(out));
}

Interpolated interpolate(const ScalarField2D& w, std::span<const double> xs,
                         std::span<const double> ys) {
  const GridSpec& g = w.grid();
  const int n = g.n_points;
  const int nc = n / 2 + 1;
  const auto& c = w.spectral();
  const Vec2 x0 = g.point(0, 0);
  Interpolated out;
  auto outside = [&](double v, double lo) { return v < lo || v >= lo + g.box_length; };
  for (double x : xs) out.outside += outside(x, x0.x) ? ys.size() : 0;
  for (double y : ys)
    if (outside(y, x0.y)) out.outside += xs.size();
  const std::size_t nx = xs.size();
  const std::size_t ny = ys.size();
  std::vector<Complex> ex(static_cast<std::size_t>(nc) * nx);
  for (int kx = 0; kx < nc; ++kx) {
    const double k = g.wavenumber(kx);
    const double m = column_weight(kx, n);
    for (std::size_t t = 0; t < nx; ++t)
      ex[kx * nx + t] = m * std::polar(1.0, k * (xs[t] - x0.x));
  }
  // Partial sums over k_x for every k_y row.
  std::vector<Complex> part(static_cast<std::size_t>(n) * nx, 0.0);
  for (int ky = 0; ky < n; ++ky)
    for (int kx = 0; kx < nc; ++kx) {
      const Complex ck = c[static_cast<std::size_t>(ky) * nc + kx];
      if (ck == 0.0) continue;
      Complex* dst = &part[static_cast<std::size_t>(ky) * nx];
      const Complex* e = &ex[kx * nx];
      for (std::size_t t = 0; t < nx; ++t) dst[t] += ck * e[t];
    }
  out.values.assign(nx * ny, 0.0);
  const double norm_factor = 1.0 / (static_cast<double>(n) * n);
  for (std::size_t s = 0; s < ny; ++s) {
    double* dst = &out.values[s * nx];
    for (int ky = 0; ky < n; ++ky) {
      const Complex e = std::polar(1.0, g.wavenumber(ky) * (ys[s] - x0.y));
      const Complex* p = &part[static_cast<std::size_t>(ky) * nx];
      for (std::size_t t = 0; t < nx; ++t) dst[t] += (p[t] * e).real();
    }
    for (std::size_t t = 0; t < nx; ++t) dst[t] *= norm_factor;
  }
  return out;
}

Interpolated interpolate_points(const ScalarField2D& w, std::span<const Vec2> points) {
  const GridSpec& g = w.grid();
  const int n = g.n_points;
  const int nc = n / 2 + 1;
  const auto& c = w.spectral();
  const Vec2 x0 = g.point(0, 0);
  Interpolated out;
  out.values.reserve(points.size());
  std::vector<Complex> ex(nc);
  const double norm_factor = 1.0 / (static_cast<double>(n) * n);
  for (const Vec2& p : points) {
    const Vec2 q = p - x0;
    if (q.x < 0 || q.y < 0 || q.x >= g.box_length || q.y >= g.box_length) ++out.outside;
    for (int kx = 0; kx < nc; ++kx)
      ex[kx] = column_weight(kx, n) * std::polar(1.0, g.wavenumber(kx) * q.x);
    double acc = 0.0;
    for (int ky = 0; ky < n; ++ky) {
      const Complex* row = &c[static_cast<std::size_t>(ky) * nc];
      Complex s = 0.0;
      for (int kx = 0; kx < nc; ++kx) s += row[kx] * ex[kx];
      acc += (s * std::polar(1.0, g.wavenumber(ky) * q.y)).real();
    }
    out.values.push_back(acc * norm_factor);
  }
  return out;
}

}  // namespace vlab
