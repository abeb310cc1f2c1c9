#include "vlab/spectral_lab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <tuple>

#include "vlab/analytics.hpp"
#include "vlab/deformation.hpp"
#include "vlab/parallel.hpp"

namespace vlab {
namespace {

using Complex = std::complex<double>;

std::vector<double> quadrature_edges(double R, double w) {
  std::vector<double> e{0.0, w / 8, w / 4, w / 2};
  const int panels = static_cast<int>(std::ceil(R / w));
  for (int k = 1; k <= panels; ++k) e.push_back(k * w);
  return e;
}

// Smallest singular value of the upper-triangular T - i lambda by inverse
// iteration on (B^* B)^{-1}; falls back to a full SVD if it stalls.
double sigma_min_triangular(const Eigen::MatrixXcd& T, double lambda) {
  const auto m = T.rows();
  Eigen::MatrixXcd B = T;
  B.diagonal().array() -= Complex(0.0, lambda);
  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(m) / std::sqrt(static_cast<double>(m));
  double prev = 0.0;
  for (int it = 0; it < 300; ++it) {
    Eigen::VectorXcd y = B.adjoint().triangularView<Eigen::Lower>().solve(x);
    y = B.triangularView<Eigen::Upper>().solve(y);
    const double nrm = y.norm();
    if (!std::isfinite(nrm) || nrm == 0.0) break;
    x = y / nrm;
    const double sigma = 1.0 / std::sqrt(nrm);
    if (it > 2 && std::abs(sigma - prev) <= 1e-12 * sigma) return sigma;
    prev = sigma;
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(B);
  return svd.singularValues()(m - 1);
}

struct ModeScan {
  double psi = 0.0;
  double lambda = 0.0;
  std::size_t evaluations = 0;
  bool boundary = false;
};

ModeScan scan_lambda(const Eigen::MatrixXcd& T, double range, int count,
                     const std::vector<double>& extra) {
  std::vector<double> lam;
  for (int k = 0; k < count; ++k) lam.push_back(-range + 2.0 * range * k / (count - 1));
  for (double e : extra)
    if (std::abs(e) < range) lam.push_back(e);
  std::sort(lam.begin(), lam.end());
  lam.erase(std::unique(lam.begin(), lam.end()), lam.end());
  ModeScan s;
  std::vector<double> val(lam.size());
  for (std::size_t k = 0; k < lam.size(); ++k) val[k] = sigma_min_triangular(T, lam[k]);
  s.evaluations = lam.size();
  const auto best = static_cast<std::size_t>(std::min_element(val.begin(), val.end()) - val.begin());
  s.boundary = best == 0 || best + 1 == lam.size();
  s.psi = val[best];
  s.lambda = lam[best];
  if (!s.boundary) {
    // Golden-section refinement inside the neighbouring bracket.
    double a = lam[best - 1], b = lam[best + 1];
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = sigma_min_triangular(T, c), fd = sigma_min_triangular(T, d);
    for (int it = 0; it < 60 && (b - a) > 1e-10 * std::max(1.0, std::abs(s.lambda)); ++it) {
      if (fc < fd) {
        b = d; d = c; fd = fc;
        c = b - r * (b - a);
        fc = sigma_min_triangular(T, c);
      } else {
        a = c; c = d; fc = fd;
        d = a + r * (b - a);
        fd = sigma_min_triangular(T, d);
      }
      s.evaluations += 1;
    }
    const double lm = fc < fd ? c : d;
    const double fm = std::min(fc, fd);
    if (fm < s.psi) {
      s.psi = fm;
      s.lambda = lm;
    }
  }
  return s;
}

double rel_frobenius(const Eigen::MatrixXcd& defect, const Eigen::MatrixXcd& ref) {
  const double r = ref.norm();
  return r == 0.0 ? 0.0 : defect.norm() / r;
}

}  // namespace

double ModeDiscretization::quadrature_radius(int n) const {
  return 2.0 * std::sqrt(4.0 * basis_size + 2.0 * n + 10.0) + 8.0;
}

std::string ModeDiscretization::description() const {
  std::ostringstream s;
  s << "Laguerre-Galerkin, conjugated by G^{1/2}, " << basis_size
    << " basis functions per mode, Gauss-Legendre panels of width " << panel_width;
  return s.str();
}

Eigen::MatrixXd laguerre_basis(int n, int count, const std::vector<double>& radii) {
  require(n >= 0 && count >= 1, "laguerre_basis: need n >= 0 and count >= 1");
  const auto N = static_cast<Eigen::Index>(radii.size());
  Eigen::MatrixXd E(count, N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const double s = 0.25 * radii[k] * radii[k];
    const double l0 = n == 0 ? std::exp(-0.5 * s)
                             : std::exp(0.5 * n * std::log(s) - 0.5 * s - 0.5 * std::lgamma(n + 1.0));
    E(0, k) = l0;
    if (count > 1) E(1, k) = (n + 1.0 - s) * l0 / std::sqrt(n + 1.0);
    for (int m = 1; m + 1 < count; ++m)
      E(m + 1, k) = ((2.0 * m + n + 1.0 - s) * E(m, k) - std::sqrt(m * (m + static_cast<double>(n))) * E(m - 1, k)) /
                    std::sqrt((m + 1.0) * (m + n + 1.0));
  }
  return E / std::sqrt(2.0);
}

Eigen::MatrixXd assembled_L(int n, const ModeDiscretization& disc) {
  const auto b = mode_blocks(n, disc);
  const auto& r = b->quadrature->nodes();
  const auto& w = b->quadrature->weights();
  const auto N = static_cast<Eigen::Index>(r.size());
  const double delta = 1e-5;
  std::vector<double> rp(r.size()), rm(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    rp[k] = r[k] + delta;
    rm[k] = r[k] - delta;
  }
  const Eigen::MatrixXd D =
      (laguerre_basis(n, disc.basis_size, rp) - laguerre_basis(n, disc.basis_size, rm)) / (2.0 * delta);
  Eigen::VectorXd wr(N), pot(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    wr[k] = w[k] * r[k];
    pot[k] = wr[k] * (n * n / (r[k] * r[k]) + r[k] * r[k] / 16.0 - 0.5);
  }
  return -(D * wr.asDiagonal() * D.transpose()) - b->basis * pot.asDiagonal() * b->basis.transpose();
}

std::shared_ptr<const ModeBlocks> mode_blocks(int n, const ModeDiscretization& disc) {
  require(n >= 0, "mode_blocks: mode must be >= 0");
  require(disc.basis_size >= 4, "mode_blocks: basis_size must be >= 4");
  require(disc.panel_width > 0.0, "mode_blocks: panel_width must be positive");
  struct Entry {
    std::once_flag once;
    std::shared_ptr<const ModeBlocks> blocks;
  };
  static std::mutex mu;
  static std::map<std::tuple<int, int, double>, std::shared_ptr<Entry>> cache;
  std::shared_ptr<Entry> entry;
  {
    std::lock_guard lock(mu);
    auto& slot = cache[{n, disc.basis_size, disc.panel_width}];
    if (!slot) slot = std::make_shared<Entry>();
    entry = slot;
  }
  std::call_once(entry->once, [&] {
    auto b = std::make_shared<ModeBlocks>();
    const int M = disc.basis_size;
    b->n = n;
    b->L.resize(M);
    for (int m = 0; m < M; ++m) b->L[m] = -(0.5 * n + m);
    b->quadrature = std::make_shared<RadialGrid>(
        RadialGrid::from_edges(quadrature_edges(disc.quadrature_radius(n), disc.panel_width), 16));
    const auto& r = b->quadrature->nodes();
    const auto& w = b->quadrature->weights();
    const auto N = static_cast<Eigen::Index>(r.size());
    b->basis = laguerre_basis(n, M, r);
    Eigen::VectorXd wr(N), wrphi(N), sqg(N);
    for (Eigen::Index k = 0; k < N; ++k) {
      const PhiG pg = phi_g(r[k]);
      wr[k] = w[k] * r[k];
      wrphi[k] = wr[k] * pg.phi;
      sqg[k] = std::sqrt(pg.g);
    }
    Eigen::MatrixXd Phi = b->basis * wrphi.asDiagonal() * b->basis.transpose();
    b->phi_asymmetry = (Phi - Phi.transpose()).norm() / Phi.norm();
    Phi = 0.5 * (Phi + Phi.transpose()).eval();
    if (n == 0) {
      b->Lambda = Eigen::MatrixXcd::Zero(M, M);
    } else {
      const Eigen::MatrixXd W = b->basis * sqg.asDiagonal();
      Eigen::MatrixXd Om(M, N);
      std::vector<double> row(static_cast<std::size_t>(N));
      for (int m = 0; m < M; ++m) {
        for (Eigen::Index k = 0; k < N; ++k) row[k] = W(m, k);
        const auto om = b->quadrature->omega_apply(row, n);
        for (Eigen::Index k = 0; k < N; ++k) Om(m, k) = om[k];
      }
      Eigen::MatrixXd S = W * wr.asDiagonal() * Om.transpose();
      b->s_asymmetry = (S - S.transpose()).norm() / S.norm();
      S = 0.5 * (S + S.transpose()).eval();
      b->Lambda = Complex(0.0, n) * (Phi - S).cast<Complex>();
    }
    entry->blocks = std::move(b);
  });
  return entry->blocks;
}

ModeOperator build_mode_operator(int n, double alpha, const ModeDiscretization& disc,
                                 bool deflate) {
  require(std::isfinite(alpha), "build_mode_operator: alpha must be finite");
  const auto b = mode_blocks(n, disc);
  ModeOperator op;
  op.n = n;
  op.alpha = alpha;
  op.disc = disc;
  op.deflated = deflate && n == 1;
  Eigen::MatrixXcd A = -alpha * b->Lambda;
  A.diagonal() += b->L.cast<Complex>();
  if (op.deflated) {
    const auto m = A.rows() - 1;
    op.matrix = A.bottomRightCorner(m, m);
  } else {
    op.matrix = std::move(A);
  }
  return op;
}

StructureReport operator_structure(int n, const ModeDiscretization& disc) {
  const auto b = mode_blocks(n, disc);
  StructureReport r;
  const Eigen::MatrixXd L = assembled_L(n, disc);
  r.l_symmetry = (L - L.transpose()).norm() / L.norm();
  const Eigen::MatrixXd exact = b->L.asDiagonal();
  r.l_diagonal = (L - exact).cwiseAbs().maxCoeff() / b->L.cwiseAbs().maxCoeff();
  r.lambda_skew = rel_frobenius(b->Lambda + b->Lambda.adjoint(), b->Lambda);
  r.phi_asymmetry = b->phi_asymmetry;
  r.s_asymmetry = b->s_asymmetry;
  return r;
}

std::vector<ModeEigenpair> mode_eigenpairs(const ModeOperator& op, std::size_t k) {
  require(k <= static_cast<std::size_t>(op.matrix.rows()), "mode_spectrum: k exceeds the dimension");
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op.matrix, true);
  if (es.info() != Eigen::Success) {
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(op.matrix);
    const auto& sv = svd.singularValues();
    throw NumericalFailure("mode_spectrum: eigensolver failed for n = " + std::to_string(op.n) +
                           ", alpha = " + std::to_string(op.alpha) + " (2-norm condition " +
                           std::to_string(sv(0) / sv(sv.size() - 1)) + ")");
  }
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(op.matrix.rows()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Eigen::Index>(i);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    return es.eigenvalues()[a].real() > es.eigenvalues()[b].real();
  });
  std::vector<ModeEigenpair> out;
  for (std::size_t i = 0; i < k; ++i)
    out.push_back({es.eigenvalues()[idx[i]], es.eigenvectors().col(idx[i])});
  return out;
}

std::vector<Complex> mode_spectrum(const ModeOperator& op, std::size_t k) {
  std::vector<Complex> out;
  for (const auto& p : mode_eigenpairs(op, k)) out.push_back(p.value);
  return out;
}

RadialModeProfile eigenfunction(const ModeOperator& op, const Eigen::VectorXcd& c) {
  const auto b = mode_blocks(op.n, op.disc);
  const Eigen::Index off = op.deflated ? 1 : 0;
  require(c.size() + off == b->basis.rows(), "eigenfunction: coefficient count mismatch");
  const auto& r = b->quadrature->nodes();
  RadialModeProfile p{b->quadrature, op.n, {}};
  for (std::size_t k = 0; k < r.size(); ++k) {
    Complex s = 0.0;
    for (Eigen::Index m = 0; m < c.size(); ++m) s += c[m] * b->basis(m + off, static_cast<Eigen::Index>(k));
    p.amplitudes.push_back(std::sqrt(phi_g(r[k]).g) * s);
  }
  return p;
}

double rg_similarity(const ModeOperator& op, const Eigen::VectorXcd& c) {
  const RadialModeProfile p = eigenfunction(op, c);
  const auto& r = p.grid->nodes();
  const auto& w = p.grid->weights();
  Complex ip = 0.0;
  double na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double g = phi_g(r[k]).g;
    const double target = r[k] * g;
    const double wt = w[k] * r[k] / g;
    ip += wt * p.amplitudes[k] * target;
    na += wt * std::norm(p.amplitudes[k]);
    nb += wt * target * target;
  }
  return std::abs(ip) / std::sqrt(na * nb);
}

KernelReport kernel_check(const ModeDiscretization& disc, const RadialGrid& grid,
                          const std::vector<std::vector<double>>& radial_profiles) {
  KernelReport rep;
  auto shared = std::make_shared<RadialGrid>(grid);
  RadialModeProfile rg{shared, 1, {}};
  for (double r : grid.nodes()) rg.amplitudes.push_back(r * phi_g(r).g);
  rep.lambda1_rg_nodal = mode_x_norm(apply_lambda(rg)) / mode_x_norm(rg);
  const auto b1 = mode_blocks(1, disc);
  rep.lambda1_rg_basis = b1->Lambda.col(0).norm() / b1->Lambda.norm();
  for (const auto& prof : radial_profiles) {
    require(prof.size() == grid.size(), "kernel_check: radial profile size mismatch");
    RadialModeProfile p{shared, 0, {}};
    for (double v : prof) p.amplitudes.push_back(v);
    rep.lambda0_max = std::max(rep.lambda0_max, mode_x_norm(apply_lambda(p)));
  }
  const RadialGrid fine = grid.refined();
  for (int n : {2, 3, 4}) {
    rep.modes.push_back(n);
    for (const RadialGrid* g : {&grid, &fine}) {
      const Eigen::MatrixXd core = nodal_lambda_core(*g, n);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(core, Eigen::EigenvaluesOnly);
      const double s = n * es.eigenvalues().cwiseAbs().minCoeff();
      (g == &grid ? rep.sigma_min : rep.sigma_min_refined).push_back(s);
    }
  }
  return rep;
}

AlphaBounds bounds_at(double alpha, const ModeDiscretization& disc, const BoundsOptions& opts) {
  require(opts.n_max >= 2, "bounds: n_max must be >= 2");
  require(opts.lambda_count >= 3, "bounds: lambda_count must be >= 3");
  AlphaBounds out;
  out.alpha = alpha;
  out.lambda_count = opts.lambda_count;
  out.lambda_range = opts.lambda_range > 0.0 ? opts.lambda_range : std::max(2.0 * std::abs(alpha), 10.0);
  out.Sigma = out.Psi = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= opts.n_max; ++n) {
    const ModeOperator op = build_mode_operator(n, alpha, disc, true);
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(op.matrix);
    if (schur.info() != Eigen::Success)
      throw NumericalFailure("bounds: Schur decomposition failed for n = " + std::to_string(n) +
                             ", alpha = " + std::to_string(alpha));
    const Eigen::MatrixXcd& T = schur.matrixT();
    std::vector<Complex> eig;
    for (Eigen::Index k = 0; k < T.rows(); ++k) eig.push_back(T(k, k));
    std::sort(eig.begin(), eig.end(), [](Complex a, Complex b) { return a.real() > b.real(); });
    ModeBound mb;
    mb.n = n;
    mb.leading = eig.front();
    mb.sigma = -eig.front().real();
    std::vector<double> extra;
    for (std::size_t k = 0; k < std::min<std::size_t>(3, eig.size()); ++k) extra.push_back(eig[k].imag());
    double range = out.lambda_range;
    ModeScan scan;
    for (int d = 0;; ++d) {
      scan = scan_lambda(T, range, opts.lambda_count, extra);
      out.lambda_evaluations += scan.evaluations;
      if (!scan.boundary || d >= opts.max_range_doublings) break;
      range *= 2.0;
    }
    out.range_flag = out.range_flag || scan.boundary;
    mb.psi = scan.psi;
    mb.lambda_at_min = scan.lambda;
    out.Sigma = std::min(out.Sigma, mb.sigma);
    out.Psi = std::min(out.Psi, mb.psi);
    out.modes.push_back(mb);
  }
  return out;
}

double spectral_bound(double alpha, const ModeDiscretization& disc, int n_max) {
  require(n_max >= 2, "spectral_bound: n_max must be >= 2");
  double s = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= n_max; ++n) {
    const auto ev = mode_spectrum(build_mode_operator(n, alpha, disc, true), 1);
    s = std::min(s, -ev.front().real());
  }
  return s;
}

double pseudospectral_bound(double alpha, const ModeDiscretization& disc, int n_max,
                            double lambda_range, int lambda_count) {
  BoundsOptions o;
  o.n_max = n_max;
  o.lambda_range = lambda_range;
  o.lambda_count = lambda_count;
  return bounds_at(alpha, disc, o).Psi;
}

BoundsReport bounds_sweep(const std::vector<double>& alphas, const ModeDiscretization& disc,
                          const BoundsOptions& opts) {
  BoundsReport rep;
  rep.disc = disc;
  rep.options = opts;
  rep.rows.resize(alphas.size());
  // Warm the alpha-independent cache before fanning out.
  for (int n = 1; n <= opts.n_max; ++n) mode_blocks(n, disc);
  parallel_for(alphas.size(), [&](std::size_t i) { rep.rows[i] = bounds_at(alphas[i], disc, opts); });
  std::vector<double> a, s, p;
  for (const auto& r : rep.rows)
    if (std::abs(r.alpha) >= 8.0 && std::abs(r.alpha) <= 512.0) {
      a.push_back(std::abs(r.alpha));
      s.push_back(r.Sigma);
      p.push_back(r.Psi);
    }
  if (a.size() >= 3) {
    rep.sigma_fit = fit_scaling(a, s);
    rep.psi_fit = fit_scaling(a, p);
  }
  return rep;
}

void write_bounds(const BoundsReport& report, const std::filesystem::path& stem) {
  nlohmann::json j;
  j["discretization"] = report.disc.description();
  j["basis_size"] = report.disc.basis_size;
  j["n_max"] = report.options.n_max;
  j["lambda_count"] = report.options.lambda_count;
  j["tol_disc"] = report.tol_disc;
  auto fit_json = [](const std::optional<ScalingFit>& f) -> nlohmann::json {
    if (!f) return nullptr;
    return {{"exponent", f->slope},     {"log_prefactor", f->intercept}, {"r2", f->r2},
            {"stderr", f->slope_stderr}, {"ci95", f->slope_ci95},         {"points", f->points}};
  };
  j["sigma_growth_fit"] = fit_json(report.sigma_fit);
  j["psi_growth_fit"] = fit_json(report.psi_fit);
  for (const auto& r : report.rows) {
    nlohmann::json row{{"alpha", r.alpha},
                       {"Sigma", r.Sigma},
                       {"Psi", r.Psi},
                       {"lambda_range", r.lambda_range},
                       {"lambda_count", r.lambda_count},
                       {"lambda_evaluations", r.lambda_evaluations},
                       {"range_flag", r.range_flag}};
    for (const auto& m : r.modes)
      row["modes"].push_back({{"n", m.n},
                              {"sigma", m.sigma},
                              {"psi", m.psi},
                              {"lambda_at_min", m.lambda_at_min},
                              {"leading_re", m.leading.real()},
                              {"leading_im", m.leading.imag()}});
    j["rows"].push_back(row);
  }
  std::ofstream js(stem.string() + ".json");
  if (!js) throw std::runtime_error("write_bounds: cannot open " + stem.string() + ".json");
  js << j.dump(2) << '\n';
  std::ofstream csv(stem.string() + ".csv");
  csv << "alpha,Sigma,Psi";
  const int nm = report.options.n_max;
  for (int n = 1; n <= nm; ++n) csv << ",sigma_n" << n << ",psi_n" << n;
  csv << '\n' << std::setprecision(17);
  for (const auto& r : report.rows) {
    csv << r.alpha << ',' << r.Sigma << ',' << r.Psi;
    for (const auto& m : r.modes) csv << ',' << m.sigma << ',' << m.psi;
    csv << '\n';
  }
}

}  // namespace vlab
