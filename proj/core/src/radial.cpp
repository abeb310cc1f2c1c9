#include "vlab/radial.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <nlohmann/json.hpp>
#include <numbers>

#include "vlab/types.hpp"

namespace vlab {

void gauss_legendre(int order, std::vector<double>& x, std::vector<double>& w) {
  require(order >= 2, "gauss_legendre: order must be >= 2");
  x.assign(order, 0.0);
  w.assign(order, 0.0);
  for (int i = 0; i < order; ++i) {
    double z = std::cos(pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[order - 1 - i] = z;
    w[order - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

namespace {

// Lagrange basis of `ref` evaluated at t (barycentric form).
void lagrange_row(const std::vector<double>& ref, const std::vector<double>& bary, double t,
                  double* out) {
  const int p = static_cast<int>(ref.size());
  for (int j = 0; j < p; ++j) {
    if (t == ref[j]) {
      std::fill(out, out + p, 0.0);
      out[j] = 1.0;
      return;
    }
  }
  double s = 0.0;
  for (int j = 0; j < p; ++j) {
    out[j] = bary[j] / (t - ref[j]);
    s += out[j];
  }
  for (int j = 0; j < p; ++j) out[j] /= s;
}

}  // namespace

RadialGrid::RadialGrid(const Options& o) {
  require(o.order >= 4, "RadialGrid: order must be >= 4");
  require(o.nodes >= o.order && o.nodes % o.order == 0,
          "RadialGrid: nodes must be a positive multiple of order");
  require(o.r_max > 0.0 && o.first_node > 0.0 && o.first_node < o.r_max,
          "RadialGrid: need 0 < first_node < r_max");
  std::vector<double> x, w;
  gauss_legendre(o.order, x, w);
  const int panels = o.nodes / o.order;
  const double a = 2.0 * o.first_node / (1.0 + x[0]);
  std::vector<double> edges{0.0};
  if (panels == 1) {
    edges.push_back(o.r_max);
  } else {
    require(a * panels < o.r_max, "RadialGrid: first_node too large for r_max and node count");
    // Solve a (q^P - 1)/(q - 1) = r_max for the growth ratio q > 1.
    auto total = [&](double q) { return a * (std::pow(q, panels) - 1.0) / (q - 1.0); };
    double lo = 1.0 + 1e-12, hi = 2.0;
    while (total(hi) < o.r_max) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (total(mid) < o.r_max ? lo : hi) = mid;
    }
    const double q = 0.5 * (lo + hi);
    double width = a;
    for (int k = 0; k < panels; ++k) {
      edges.push_back(k + 1 == panels ? o.r_max : edges.back() + width);
      width *= q;
    }
  }
  build(std::move(edges), o.order);
  rule_ = "gauss-legendre panels, geometric grading from r_1";
}

RadialGrid RadialGrid::from_edges(std::vector<double> edges, int order) {
  require(edges.size() >= 2 && edges.front() == 0.0, "RadialGrid: edges must start at 0");
  for (std::size_t k = 1; k < edges.size(); ++k)
    require(edges[k] > edges[k - 1], "RadialGrid: edges must increase");
  RadialGrid g{Empty{}};
  g.build(std::move(edges), order);
  g.rule_ = "gauss-legendre panels, explicit edges";
  return g;
}

void RadialGrid::build(std::vector<double> edges, int order) {
  edges_ = std::move(edges);
  order_ = order;
  gauss_legendre(order, ref_nodes_, ref_weights_);
  bary_.assign(order, 1.0);
  for (int j = 0; j < order; ++j)
    for (int k = 0; k < order; ++k)
      if (k != j) bary_[j] /= (ref_nodes_[j] - ref_nodes_[k]);
  nodes_.clear();
  weights_.clear();
  for (int k = 0; k + 1 < static_cast<int>(edges_.size()); ++k) {
    const double a = edges_[k], b = edges_[k + 1];
    for (int j = 0; j < order; ++j) {
      nodes_.push_back(0.5 * (a + b) + 0.5 * (b - a) * ref_nodes_[j]);
      weights_.push_back(0.5 * (b - a) * ref_weights_[j]);
    }
  }
  // Sub-quadratures for the partial panel integrals of omega_apply.
  auto partial = std::make_shared<std::vector<Partial>>(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const int k = static_cast<int>(i) / order;
    const double a = edges_[k], b = edges_[k + 1];
    const double r = nodes_[i];
    Partial& P = (*partial)[i];
    P.left_interp.resize(order, order);
    P.right_interp.resize(order, order);
    std::vector<double> row(order);
    for (int s = 0; s < order; ++s) {
      const double tl = a + 0.5 * (r - a) * (1.0 + ref_nodes_[s]);
      const double tr = r + 0.5 * (b - r) * (1.0 + ref_nodes_[s]);
      P.left_nodes.push_back(tl);
      P.left_w.push_back(0.5 * (r - a) * ref_weights_[s]);
      P.right_nodes.push_back(tr);
      P.right_w.push_back(0.5 * (b - r) * ref_weights_[s]);
      lagrange_row(ref_nodes_, bary_, 2.0 * (tl - a) / (b - a) - 1.0, row.data());
      for (int j = 0; j < order; ++j) P.left_interp(s, j) = row[j];
      lagrange_row(ref_nodes_, bary_, 2.0 * (tr - a) / (b - a) - 1.0, row.data());
      for (int j = 0; j < order; ++j) P.right_interp(s, j) = row[j];
    }
  }
  partial_ = std::move(partial);
}

RadialGrid RadialGrid::refined() const {
  std::vector<double> e{edges_.front()};
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    e.push_back(0.5 * (edges_[k - 1] + edges_[k]));
    e.push_back(edges_[k]);
  }
  RadialGrid g{Empty{}};
  g.build(std::move(e), order_);
  g.rule_ = rule_ + " (refined)";
  return g;
}

double RadialGrid::integrate(std::span<const double> f) const {
  require(f.size() == nodes_.size(), "RadialGrid::integrate: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += weights_[i] * f[i];
  return s;
}

double RadialGrid::evaluate(std::span<const double> values, double r) const {
  require(values.size() == nodes_.size(), "RadialGrid::evaluate: size mismatch");
  require(r >= 0.0 && r <= r_max(), "RadialGrid::evaluate: r outside the grid");
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), r);
  const int k = std::clamp(static_cast<int>(it - edges_.begin()) - 1, 0, panels() - 1);
  const double a = edges_[k], b = edges_[k + 1];
  std::vector<double> row(order_);
  lagrange_row(ref_nodes_, bary_, 2.0 * (r - a) / (b - a) - 1.0, row.data());
  double s = 0.0;
  for (int j = 0; j < order_; ++j) s += row[j] * values[static_cast<std::size_t>(k) * order_ + j];
  return s;
}

std::complex<double> RadialGrid::evaluate(std::span<const std::complex<double>> values,
                                          double r) const {
  std::vector<double> re(values.size()), im(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    re[i] = values[i].real();
    im[i] = values[i].imag();
  }
  return {evaluate(re, r), evaluate(im, r)};
}

std::vector<double> RadialGrid::omega_apply(std::span<const double> w, int n) const {
  require(n >= 1, "omega_apply: mode must be >= 1");
  require(n <= 32, "omega_apply: mode above 32 is not supported");
  require(w.size() == nodes_.size(), "omega_apply: size mismatch");
  const int P = panels();
  const int p = order_;
  // Whole-panel sums: left uses s^{n+1} w, right uses s^{1-n} w.
  std::vector<double> left(P + 1, 0.0), right(P + 1, 0.0);
  for (int k = 0; k < P; ++k) {
    double sl = 0.0, sr = 0.0;
    for (int j = 0; j < p; ++j) {
      const std::size_t idx = static_cast<std::size_t>(k) * p + j;
      const double s = nodes_[idx];
      sl += weights_[idx] * std::pow(s, n + 1) * w[idx];
      sr += weights_[idx] * std::pow(s, 1 - n) * w[idx];
    }
    left[k + 1] = left[k] + sl;
    right[k] = sr;
  }
  for (int k = P - 1; k >= 0; --k) right[k] += right[k + 1];
  std::vector<double> out(nodes_.size());
  Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  for (int k = 0; k < P; ++k) {
    const Eigen::VectorXd panel = wv.segment(static_cast<Eigen::Index>(k) * p, p);
    for (int j = 0; j < p; ++j) {
      const std::size_t i = static_cast<std::size_t>(k) * p + j;
      const double r = nodes_[i];
      const Partial& Q = (*partial_)[i];
      const Eigen::VectorXd wl = Q.left_interp * panel;
      const Eigen::VectorXd wr = Q.right_interp * panel;
      double A = std::pow(r, -n) * left[k];
      double B = std::pow(r, n) * right[k + 1];
      for (int s = 0; s < p; ++s) {
        const double tl = Q.left_nodes[s], tr = Q.right_nodes[s];
        A += Q.left_w[s] * tl * std::pow(tl / r, n) * wl[s];
        B += Q.right_w[s] * tr * std::pow(r / tr, n) * wr[s];
      }
      out[i] = (A + B) / (4.0 * n);
    }
  }
  return out;
}

Eigen::MatrixXd RadialGrid::omega_matrix(int n) const {
  const auto N = static_cast<Eigen::Index>(nodes_.size());
  Eigen::MatrixXd K(N, N);
  std::vector<double> e(nodes_.size(), 0.0);
  for (Eigen::Index j = 0; j < N; ++j) {
    e[j] = 1.0;
    const auto col = omega_apply(e, n);
    for (Eigen::Index i = 0; i < N; ++i) K(i, j) = col[i];
    e[j] = 0.0;
  }
  return K;
}

RadialModeProfile::Check RadialModeProfile::check() const {
  Check c;
  double mx = 0.0;
  for (const auto& a : amplitudes) mx = std::max(mx, std::abs(a));
  if (mx == 0.0) return c;
  c.tail_ratio = std::abs(amplitudes.back()) / mx;
  c.decays = c.tail_ratio < 1e-10;
  if (mode >= 1) {
    const auto& r = grid->nodes();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int i = 0; i < 3; ++i) {
      const double a = std::abs(amplitudes[i]);
      if (a <= 0.0) continue;
      const double x = std::log(r[i]), y = std::log(a);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++cnt;
    }
    if (cnt >= 2) {
      c.origin_exponent = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
      c.regular = c.origin_exponent > mode - 0.5;
    }
  }
  return c;
}

PotentialResult omega_potential(const RadialModeProfile& p) {
  require(p.mode >= 1, "omega_potential: mode must be >= 1 (formula undefined for n = 0)");
  require(p.grid != nullptr && p.amplitudes.size() == p.grid->size(),
          "omega_potential: profile does not match its grid");
  const std::size_t N = p.amplitudes.size();
  std::vector<double> re(N), im(N);
  for (std::size_t i = 0; i < N; ++i) {
    re[i] = p.amplitudes[i].real();
    im[i] = p.amplitudes[i].imag();
  }
  const auto ore = p.grid->omega_apply(re, p.mode);
  const auto oim = p.grid->omega_apply(im, p.mode);
  PotentialResult out;
  out.potential.grid = p.grid;
  out.potential.mode = p.mode;
  out.potential.amplitudes.resize(N);
  double mx = 0.0;
  const auto& r = p.grid->nodes();
  for (std::size_t i = 0; i < N; ++i) {
    out.potential.amplitudes[i] = {ore[i], oim[i]};
    mx = std::max(mx, r[i] * std::abs(p.amplitudes[i]));
  }
  out.tail_truncated = r.back() * std::abs(p.amplitudes.back()) > 1e-12 * mx;
  return out;
}

void write_profile(const RadialModeProfile& p, const std::filesystem::path& stem) {
  std::ofstream csv(stem.string() + ".csv");
  if (!csv) throw std::runtime_error("write_profile: cannot open " + stem.string() + ".csv");
  csv << "r,re,im\n" << std::setprecision(17);
  const auto& r = p.grid->nodes();
  for (std::size_t i = 0; i < r.size(); ++i)
    csv << r[i] << ',' << p.amplitudes[i].real() << ',' << p.amplitudes[i].imag() << '\n';
  nlohmann::json m;
  m["mode"] = p.mode;
  m["grid"] = {{"nodes", p.grid->size()},
               {"r_max", p.grid->r_max()},
               {"first_node", r.front()},
               {"order", p.grid->order()},
               {"spacing_rule", p.grid->spacing_rule()}};
  std::ofstream js(stem.string() + ".json");
  js << m.dump(2) << '\n';
}

}  // namespace vlab
