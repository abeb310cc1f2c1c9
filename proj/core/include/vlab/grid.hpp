#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "vlab/types.hpp"

namespace vlab {

// Square periodic box of side L centred at `origin`, sampled at n x n points.
// Node (i, j) sits at origin - L/2 + (i, j) h, so node (n/2, n/2) is the centre.
struct GridSpec {
  int n_points = 0;
  double box_length = 0.0;
  Vec2 origin{};

  GridSpec() = default;
  GridSpec(int n, double L, Vec2 centre = {});

  double spacing() const { return box_length / n_points; }
  std::size_t size() const { return static_cast<std::size_t>(n_points) * n_points; }
  std::size_t spectral_size() const {
    return static_cast<std::size_t>(n_points) * (n_points / 2 + 1);
  }
  Vec2 point(int i, int j) const {
    const double h = spacing();
    return {origin.x - 0.5 * box_length + i * h, origin.y - 0.5 * box_length + j * h};
  }
  // Angular wavenumber of spectral index k along either axis.
  double wavenumber(int k) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Real samples on a GridSpec, row-major with row index j (y) and column i (x).
class ScalarField2D {
 public:
  using Complex = std::complex<double>;

  ScalarField2D() = default;
  explicit ScalarField2D(const GridSpec& grid);
  // Rejects non-finite samples, naming the first offending index.
  ScalarField2D(const GridSpec& grid, std::vector<double> values);

  template <class F>
  static ScalarField2D sample(const GridSpec& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (int j = 0; j < grid.n_points; ++j)
      for (int i = 0; i < grid.n_points; ++i)
        v[static_cast<std::size_t>(j) * grid.n_points + i] = f(grid.point(i, j));
    return ScalarField2D(grid, std::move(v));
  }

  // Builds a field from (possibly filtered) r2c coefficients.
  static ScalarField2D from_spectral(const GridSpec& grid, std::vector<Complex> coeffs);

  const GridSpec& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator()(int i, int j) const {
    return values_[static_cast<std::size_t>(j) * grid_.n_points + i];
  }
  double& at(int i, int j) {
    invalidate();
    return values_[static_cast<std::size_t>(j) * grid_.n_points + i];
  }
  std::span<double> mutable_values() {
    invalidate();
    return values_;
  }

  // Unnormalized r2c coefficients, computed once and cached (thread-safe).
  const std::vector<Complex>& spectral() const;

  double max_abs() const;

  ScalarField2D& operator+=(const ScalarField2D& o);
  ScalarField2D& operator-=(const ScalarField2D& o);
  ScalarField2D& operator*=(double s);
  friend ScalarField2D operator+(ScalarField2D a, const ScalarField2D& b) { return a += b; }
  friend ScalarField2D operator-(ScalarField2D a, const ScalarField2D& b) { return a -= b; }
  friend ScalarField2D operator*(double s, ScalarField2D a) { return a *= s; }

 private:
  struct Cache {
    std::once_flag once;
    std::vector<Complex> coeffs;
  };
  void invalidate() { cache_ = std::make_shared<Cache>(); }

  GridSpec grid_;
  std::vector<double> values_;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

struct VectorField2D {
  GridSpec grid;
  std::vector<double> u;
  std::vector<double> v;

  double max_norm() const;
};

}  // namespace vlab
