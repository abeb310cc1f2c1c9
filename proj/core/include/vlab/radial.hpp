#pragma once

#include <Eigen/Dense>
#include <complex>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vlab {

struct RadialGridOptions {
  double r_max = 20.0;
  int nodes = 400;
  double first_node = 1e-3;
  int order = 16;
};

// Composite Gauss-Legendre grid on (0, r_max]. Panels grow geometrically from
// the origin so that the first node sits at `first_node`.
class RadialGrid {
 public:
  using Options = RadialGridOptions;

  RadialGrid() : RadialGrid(Options{}) {}
  explicit RadialGrid(const Options& opts);
  // Panels [edges[k], edges[k+1]] with `order` nodes each.
  static RadialGrid from_edges(std::vector<double> edges, int order);

  const std::vector<double>& nodes() const { return nodes_; }
  // Weights for int f(r) dr.
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& edges() const { return edges_; }
  int order() const { return order_; }
  int panels() const { return static_cast<int>(edges_.size()) - 1; }
  std::size_t size() const { return nodes_.size(); }
  double r_max() const { return edges_.back(); }
  std::string spacing_rule() const { return rule_; }

  // Same panels, each split in two (doubles the node count).
  RadialGrid refined() const;

  double integrate(std::span<const double> f) const;
  // Polynomial interpolation inside the panel containing r.
  double evaluate(std::span<const double> values, double r) const;
  std::complex<double> evaluate(std::span<const std::complex<double>> values, double r) const;

  // Omega_n at the nodes: (1/4n)[int_0^r (s/r)^n s w ds + int_r^rmax (r/s)^n s w ds].
  std::vector<double> omega_apply(std::span<const double> w, int n) const;
  // Dense matrix K with Omega_n = K w.
  Eigen::MatrixXd omega_matrix(int n) const;

 private:
  struct Empty {};
  explicit RadialGrid(Empty) {}
  void build(std::vector<double> edges, int order);

  struct Partial {
    // Interpolation weights mapping the panel values to sub-quadrature nodes on
    // [a, r_i] (left) and [r_i, b] (right), already multiplied by the sub-weights.
    std::vector<double> left_nodes, left_w, right_nodes, right_w;
    Eigen::MatrixXd left_interp, right_interp;  // order x order
  };

  std::vector<double> nodes_, weights_, edges_;
  int order_ = 0;
  std::string rule_;
  std::shared_ptr<std::vector<Partial>> partial_;
  std::vector<double> bary_;  // barycentric weights of the reference nodes
  std::vector<double> ref_nodes_, ref_weights_;
};

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& x, std::vector<double>& w);

// The component Re(a(r) e^{i n theta}) of a planar field (n = 0: a is real).
struct RadialModeProfile {
  std::shared_ptr<const RadialGrid> grid;
  int mode = 0;
  std::vector<std::complex<double>> amplitudes;

  struct Check {
    double origin_exponent = 0.0;  // fitted from the first three nodes
    bool regular = true;           // exponent consistent with r^n
    double tail_ratio = 0.0;       // |a(r_max)| / max |a|
    bool decays = true;            // tail_ratio below 1e-10
  };
  Check check() const;
};

struct PotentialResult {
  RadialModeProfile potential;
  // Set when the integrand at the last node exceeds 1e-12 of its maximum.
  bool tail_truncated = false;
};

PotentialResult omega_potential(const RadialModeProfile& p);

// Writes <stem>.csv ("r,re,im") and <stem>.json (mode and grid description).
void write_profile(const RadialModeProfile& p, const std::filesystem::path& stem);

}  // namespace vlab
