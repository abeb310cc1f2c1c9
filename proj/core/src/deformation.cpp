#include "vlab/deformation.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "vlab/analytics.hpp"
#include "vlab/fields.hpp"

namespace vlab {
namespace {

using Complex = std::complex<double>;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

std::vector<PairStrain> pair_data(std::size_t i, const VortexConfiguration& c) {
  require(i < c.size(), "vortex index out of range");
  std::vector<PairStrain> out;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (j == i) continue;
    out.push_back({j, c.positions[i] - c.positions[j], c.circulations[j] / c.circulations[i]});
  }
  return out;
}

// sqrt(w_k r_k / g_k): maps nodal amplitudes to coordinates where the X norm
// (up to the angular factor) is Euclidean.
Eigen::VectorXd conjugation(const RadialGrid& grid) {
  const auto& r = grid.nodes();
  const auto& w = grid.weights();
  Eigen::VectorXd D(static_cast<Eigen::Index>(r.size()));
  for (std::size_t k = 0; k < r.size(); ++k) D[k] = std::sqrt(w[k] * r[k] / phi_g(r[k]).g);
  return D;
}

}  // namespace

StrainProfiles strain_profiles(std::size_t i, const VortexConfiguration& c, double d,
                               const GridSpec& xi_grid) {
  require(i < c.size(), "strain_profiles: vortex index out of range");
  require(d > 0.0, "strain_profiles: d must be positive");
  const auto pairs = pair_data(i, c);
  std::vector<double> A(xi_grid.size(), 0.0), B(A.size(), 0.0), C(A.size(), 0.0);
  const int n = xi_grid.n_points;
  for (int jy = 0; jy < n; ++jy)
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 xi = xi_grid.point(ix, jy);
      const double G = gaussian(xi);
      const double r2 = norm2(xi);
      const std::size_t k = static_cast<std::size_t>(jy) * n + ix;
      for (const auto& p : pairs) {
        const double z2 = norm2(p.z_ij);
        const double a = dot(xi, p.z_ij);
        const double b = dot(xi, perp(p.z_ij));
        A[k] += d * d / (2 * pi) * p.ratio * a * b / (z2 * z2) * G;
        B[k] += d * d * d / (4 * pi) * p.ratio * b * (r2 * z2 - 4 * a * a) / (z2 * z2 * z2) * G;
        C[k] += std::pow(d, 4) / pi * p.ratio * a * b * (2 * a * a - r2 * z2) /
                (z2 * z2 * z2 * z2) * G;
      }
    }
  return {ScalarField2D(xi_grid, std::move(A)), ScalarField2D(xi_grid, std::move(B)),
          ScalarField2D(xi_grid, std::move(C))};
}

RadialModeProfile strain_mode2(std::size_t i, const VortexConfiguration& c, double d,
                               std::shared_ptr<const RadialGrid> grid) {
  require(grid != nullptr, "strain_mode2: null grid");
  // (xi.z)(xi.z^perp) = (r^2 |z|^2 / 2) sin 2(theta - theta_ij), and
  // sin 2(theta - theta_ij) = Re(-i e^{-2 i theta_ij} e^{2 i theta}).
  Complex coeff = 0.0;
  for (const auto& p : pair_data(i, c)) {
    const double z2 = norm2(p.z_ij);
    const double theta = std::atan2(p.z_ij.y, p.z_ij.x);
    coeff += d * d / (4 * pi) * p.ratio / z2 * Complex(0.0, -1.0) * std::polar(1.0, -2 * theta);
  }
  RadialModeProfile a{grid, 2, {}};
  for (double r : grid->nodes()) a.amplitudes.push_back(coeff * r * r * phi_g(r).g);
  return a;
}

RadialModeProfile apply_lambda(const RadialModeProfile& f) {
  require(f.mode >= 0 && f.grid != nullptr, "apply_lambda: invalid profile");
  RadialModeProfile out{f.grid, f.mode, std::vector<Complex>(f.amplitudes.size(), 0.0)};
  if (f.mode == 0) return out;
  const auto om = omega_potential(f).potential.amplitudes;
  const auto& r = f.grid->nodes();
  const Complex in(0.0, static_cast<double>(f.mode));
  for (std::size_t k = 0; k < r.size(); ++k) {
    const PhiG pg = phi_g(r[k]);
    out.amplitudes[k] = in * (pg.phi * f.amplitudes[k] - pg.g * om[k]);
  }
  return out;
}

double mode_x_norm(const RadialModeProfile& a) {
  const auto& r = a.grid->nodes();
  const auto& w = a.grid->weights();
  double s = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k)
    s += w[k] * r[k] * std::norm(a.amplitudes[k]) / phi_g(r[k]).g;
  return std::sqrt((a.mode == 0 ? 2 * pi : pi) * s);
}

Eigen::MatrixXd nodal_lambda_core(const RadialGrid& grid, int n) {
  require(n >= 1, "nodal_lambda_core: mode must be >= 1");
  const auto N = static_cast<Eigen::Index>(grid.size());
  const Eigen::VectorXd D = conjugation(grid);
  const Eigen::MatrixXd K = grid.omega_matrix(n);
  Eigen::MatrixXd M(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const PhiG pg = phi_g(grid.nodes()[i]);
    for (Eigen::Index j = 0; j < N; ++j) M(i, j) = -D[i] * pg.g * K(i, j) / D[j];
    M(i, i) += pg.phi;
  }
  return 0.5 * (M + M.transpose());
}

DeformationSolve solve_deformation(const RadialModeProfile& a) {
  require(a.mode >= 1, "solve_deformation: mode must be >= 1");
  require(a.grid != nullptr && a.amplitudes.size() == a.grid->size(),
          "solve_deformation: profile does not match its grid");
  const RadialGrid& grid = *a.grid;
  const int n = a.mode;
  const auto N = static_cast<Eigen::Index>(grid.size());
  const Eigen::VectorXd D = conjugation(grid);
  const Eigen::MatrixXd M = nodal_lambda_core(grid, n);

  DeformationSolve out;
  out.solution = {a.grid, n, std::vector<Complex>(a.amplitudes.size(), 0.0)};
  Eigen::VectorXcd rhs(N);
  for (Eigen::Index k = 0; k < N; ++k) rhs[k] = Complex(0.0, 1.0 / n) * D[k] * a.amplitudes[k];
  if (rhs.norm() == 0.0) return out;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw NumericalFailure("solve_deformation: eigensolver failed");
  const Eigen::VectorXd mu = es.eigenvalues();
  const double mu_max = mu.cwiseAbs().maxCoeff();
  const double mu_min = mu.cwiseAbs().minCoeff();
  out.condition = mu_min > 0 ? mu_max / mu_min : std::numeric_limits<double>::infinity();
  const double cutoff = 1e-10 * mu_max;
  out.minimum_norm = mu_min < cutoff;
  const Eigen::MatrixXd& V = es.eigenvectors();
  Eigen::VectorXcd coeff = V.transpose().cast<Complex>() * rhs;
  for (Eigen::Index k = 0; k < N; ++k) coeff[k] = std::abs(mu[k]) < cutoff ? 0.0 : coeff[k] / mu[k];
  const Eigen::VectorXcd u = V.cast<Complex>() * coeff;
  for (Eigen::Index k = 0; k < N; ++k) out.solution.amplitudes[k] = u[k] / D[k];

  RadialModeProfile res = apply_lambda(out.solution);
  for (std::size_t k = 0; k < res.amplitudes.size(); ++k) res.amplitudes[k] += a.amplitudes[k];
  out.residual = mode_x_norm(res) / mode_x_norm(a);
  if (!(out.residual <= 1e-6))
    throw NumericalFailure("solve_deformation: relative residual " + std::to_string(out.residual) +
                           " above 1e-6 (condition " + std::to_string(out.condition) + ")");
  return out;
}

DeformationShape deformation_shape(std::shared_ptr<const RadialGrid> grid) {
  RadialModeProfile a{grid, 2, {}};
  for (double r : grid->nodes()) a.amplitudes.push_back(Complex(0.0, -1.0) * r * r * phi_g(r).g);
  const DeformationSolve s = solve_deformation(a);
  DeformationShape out;
  out.profile = s.solution;
  for (auto& v : out.profile.amplitudes) v = v.real();
  out.residual = s.residual;
  const auto& r = grid->nodes();
  std::vector<double> lx, ly, tx, ty;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double w = out.profile.amplitudes[k].real();
    if (static_cast<int>(k) < grid->order() && w > 0) {
      lx.push_back(std::log(r[k]));
      ly.push_back(std::log(w));
    }
    if (r[k] >= 5.0 && r[k] <= 10.0 && w > 0) {
      tx.push_back(r[k] * r[k]);
      ty.push_back(std::log(w / std::pow(r[k], 4)));
    }
  }
  if (lx.size() >= 2) {
    const LineFit f = least_squares(lx, ly);
    out.origin_exponent = f.slope;
  }
  out.c1 = out.profile.amplitudes.front().real() / (r.front() * r.front());
  if (tx.size() >= 2) {
    const LineFit f = least_squares(tx, ty);
    out.tail_log_slope = f.slope;
    out.c2 = std::exp(f.intercept);
  }
  return out;
}

DeformationProfile deformation_profile(std::size_t i, const VortexConfiguration& c, double d,
                                       std::shared_ptr<const RadialGrid> grid) {
  DeformationProfile out;
  out.vortex = i;
  out.d = d;
  out.pairs = pair_data(i, c);
  if (out.pairs.empty()) {
    out.F = {grid, 2, std::vector<Complex>(grid->size(), 0.0)};
    return out;
  }
  out.solve = solve_deformation(strain_mode2(i, c, d, grid));
  out.F = out.solve.solution;
  return out;
}

ApproxProfile approx_profile(const DeformationProfile& F, double nu, double t,
                             const GridSpec& xi_grid) {
  require(nu > 0.0 && t > 0.0, "approx_profile: nu and t must be positive");
  ApproxProfile out;
  const double eps = nu * t / (F.d * F.d);
  if (eps > 0.1)
    out.warnings.push_back("nu t / d^2 = " + std::to_string(eps) +
                           " exceeds the validity regime 0.1");
  const RadialGrid& grid = *F.F.grid;
  out.w = ScalarField2D::sample(xi_grid, [&](Vec2 xi) {
    const double r = norm(xi);
    double v = gaussian(xi);
    if (r > 0.0 && r <= grid.r_max()) {
      const Complex e2 = Complex(xi.x, xi.y) * Complex(xi.x, xi.y) / (r * r);
      v += eps * (grid.evaluate(std::span<const Complex>(F.F.amplitudes), r) * e2).real();
    }
    return v;
  });
  return out;
}

std::vector<EllipseTerm> wapp2_terms(std::size_t i, const VortexConfiguration& c, double nu,
                                     double t) {
  std::vector<EllipseTerm> out;
  for (const auto& p : pair_data(i, c))
    out.push_back({p.j, nu * t / norm2(p.z_ij) * p.ratio / (4 * pi),
                   std::atan2(p.z_ij.y, p.z_ij.x)});
  return out;
}

AngularMode angular_mode(const ScalarField2D& w, Vec2 centre, double scale, int n,
                         std::shared_ptr<const RadialGrid> radii, int angles) {
  require(n >= 0 && angles > 2 * n, "angular_mode: need angles > 2n");
  const auto& r = radii->nodes();
  std::vector<Vec2> pts;
  pts.reserve(r.size() * angles);
  for (double rk : r)
    for (int m = 0; m < angles; ++m) {
      const double th = 2 * pi * m / angles;
      pts.push_back(centre + scale * rk * Vec2{std::cos(th), std::sin(th)});
    }
  const Interpolated v = interpolate_points(w, pts);
  AngularMode out;
  out.outside = v.outside;
  out.profile = {radii, n, {}};
  const double f = (n == 0 ? 1.0 : 2.0) / angles;
  for (std::size_t k = 0; k < r.size(); ++k) {
    Complex s = 0.0;
    for (int m = 0; m < angles; ++m)
      s += v.values[k * angles + m] * std::polar(1.0, -2 * pi * n * m / angles);
    out.profile.amplitudes.push_back(f * s);
  }
  return out;
}

double mode2_orientation(const ScalarField2D& w, Vec2 centre) {
  const GridSpec& g = w.grid();
  const double L = g.box_length;
  Complex c2 = 0.0;
  for (int j = 0; j < g.n_points; ++j)
    for (int i = 0; i < g.n_points; ++i) {
      Vec2 x = g.point(i, j) - centre;
      x.x -= L * std::round(x.x / L);
      x.y -= L * std::round(x.y / L);
      c2 += w(i, j) * std::conj(Complex(x.x, x.y) * Complex(x.x, x.y));
    }
  double phase = -0.5 * std::arg(c2);
  if (phase <= -pi / 2) phase += pi;
  return phase;
}

}  // namespace vlab
