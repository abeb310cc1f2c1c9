#pragma once

#include <Eigen/Dense>
#include <complex>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vlab/fit.hpp"
#include "vlab/radial.hpp"

namespace vlab {

// Galerkin discretization of the mode-n operators in Gaussian-conjugated
// coordinates f = G^{-1/2} w, where the X inner product becomes the L^2(r dr)
// product. The basis is the orthonormal Laguerre family
//   e_m(r) = l_m(r^2 / 4) / sqrt(2),  l_m(s) = sqrt(m! / (m+n)!) s^{n/2} L_m^{(n)}(s) e^{-s/2},
// which is regular like r^n at the origin and decays like a Gaussian. Matrix
// elements of Lambda_n are computed by composite Gauss-Legendre quadrature.
struct ModeDiscretization {
  int basis_size = 96;
  double panel_width = 0.5;

  // Quadrature extent for mode n: beyond the outermost turning point of e_{M-1}.
  double quadrature_radius(int n) const;
  std::string description() const;
};

// e_m(r_k) for m < count at the given radii (count x radii.size()).
Eigen::MatrixXd laguerre_basis(int n, int count, const std::vector<double>& radii);

// Galerkin matrix of the conjugated L_n = d^2/dr^2 + (1/r) d/dr - n^2/r^2 - r^2/16 + 1/2,
// assembled in weak form by quadrature with basis derivatives from central
// differences. Independent of the closed-form diagonal -(n/2 + m) used by the
// operators, so it measures how well the basis realizes L_n.
Eigen::MatrixXd assembled_L(int n, const ModeDiscretization& disc);

// alpha-independent blocks of mode n.
struct ModeBlocks {
  int n = 0;
  Eigen::VectorXd L;         // diagonal of conjugated L_n: -(n/2 + m)
  Eigen::MatrixXcd Lambda;   // conjugated Lambda_n = i n (Phi - S)
  double phi_asymmetry = 0.0;  // ||Phi - Phi^T|| / ||Phi|| before symmetrization
  double s_asymmetry = 0.0;    // ||S - S^T|| / ||S|| before symmetrization
  std::shared_ptr<const RadialGrid> quadrature;
  Eigen::MatrixXd basis;     // e_m at the quadrature nodes
};

// Cached per (n, basis size, panel width); thread-safe.
std::shared_ptr<const ModeBlocks> mode_blocks(int n, const ModeDiscretization& disc);

struct ModeOperator {
  int n = 0;
  double alpha = 0.0;
  bool deflated = false;  // mode 1 with the r g direction (basis index 0) removed
  Eigen::MatrixXcd matrix;  // L_n - alpha Lambda_n
  ModeDiscretization disc;
};

ModeOperator build_mode_operator(int n, double alpha, const ModeDiscretization& disc,
                                 bool deflate = false);

// Structure defects of a discretization: relative deviation of conjugated L_n
// from symmetric and of Lambda_n from skew-Hermitian.
struct StructureReport {
  double l_symmetry = 0.0;  // of the assembled matrix
  double l_diagonal = 0.0;  // max |assembled - diag(-(n/2 + m))| / max |diag|
  double lambda_skew = 0.0;
  double phi_asymmetry = 0.0;
  double s_asymmetry = 0.0;
};

StructureReport operator_structure(int n, const ModeDiscretization& disc);

struct ModeEigenpair {
  std::complex<double> value;
  Eigen::VectorXcd coefficients;  // in the (possibly deflated) basis
};

// The k eigenvalues with the largest real parts, in decreasing real part.
std::vector<std::complex<double>> mode_spectrum(const ModeOperator& op, std::size_t k);
std::vector<ModeEigenpair> mode_eigenpairs(const ModeOperator& op, std::size_t k);

// Nodal profile w = G^{1/2} sum_m c_m e_m on the quadrature grid of mode n.
RadialModeProfile eigenfunction(const ModeOperator& op, const Eigen::VectorXcd& coefficients);

// Cosine similarity in X between an eigenfunction and the profile r g(r).
double rg_similarity(const ModeOperator& op, const Eigen::VectorXcd& coefficients);

struct KernelReport {
  double lambda1_rg_nodal = 0.0;   // ||Lambda_1 (r g)||_X / ||r g||_X on the nodal grid
  double lambda1_rg_basis = 0.0;   // ||Lambda_1 e_0|| in the Laguerre basis
  double lambda0_max = 0.0;        // ||Lambda_0 f|| over the supplied radial profiles
  std::vector<int> modes;          // n in {2, 3, 4}
  std::vector<double> sigma_min;          // smallest singular value of Lambda_n, nodal grid
  std::vector<double> sigma_min_refined;  // same on the refined nodal grid
};

// Uses the nodal grid `grid` (fixed R_max, so the bound on sigma_min reflects
// phi(R_max) rather than the Laguerre extent) and its refinement.
KernelReport kernel_check(const ModeDiscretization& disc, const RadialGrid& grid,
                          const std::vector<std::vector<double>>& radial_profiles);

struct ModeBound {
  int n = 0;
  double sigma = 0.0;       // -max Re eig
  double psi = 0.0;         // min over lambda of sigma_min(A - i lambda)
  double lambda_at_min = 0.0;
  std::complex<double> leading{};  // rightmost eigenvalue
};

struct AlphaBounds {
  double alpha = 0.0;
  double Sigma = 0.0;
  double Psi = 0.0;
  std::vector<ModeBound> modes;
  double lambda_range = 0.0;
  int lambda_count = 0;
  std::size_t lambda_evaluations = 0;
  bool range_flag = false;  // a minimizer stayed on the range boundary after expansion
};

struct BoundsOptions {
  int n_max = 8;
  double lambda_range = 0.0;  // 0: max(2|alpha|, 10)
  int lambda_count = 201;
  int max_range_doublings = 6;
};

AlphaBounds bounds_at(double alpha, const ModeDiscretization& disc, const BoundsOptions& opts);
double spectral_bound(double alpha, const ModeDiscretization& disc, int n_max);
double pseudospectral_bound(double alpha, const ModeDiscretization& disc, int n_max,
                            double lambda_range = 0.0, int lambda_count = 201);

struct BoundsReport {
  std::vector<AlphaBounds> rows;
  // Fits of log Sigma and log Psi against log |alpha| over 8 <= |alpha| <= 512
  // (only when at least three such alphas are present).
  std::optional<ScalingFit> sigma_fit, psi_fit;
  double tol_disc = 0.02;
  ModeDiscretization disc;
  BoundsOptions options;
};

// Rows computed in parallel over alpha (VLAB_THREADS caps the workers).
BoundsReport bounds_sweep(const std::vector<double>& alphas, const ModeDiscretization& disc,
                          const BoundsOptions& opts);

// <stem>.json (full report) and <stem>.csv (alpha,Sigma,Psi and per-mode columns).
void write_bounds(const BoundsReport& report, const std::filesystem::path& stem);

}  // namespace vlab
