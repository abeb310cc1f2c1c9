#include "vlab/grid.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "vlab/fft.hpp"

namespace vlab {

GridSpec::GridSpec(int n, double L, Vec2 centre) : n_points(n), box_length(L), origin(centre) {
  require(n >= 16 && std::has_single_bit(static_cast<unsigned>(n)),
          "GridSpec: n_points must be a power of two >= 16, got " + std::to_string(n));
  require(L > 0.0 && std::isfinite(L), "GridSpec: box_length must be positive");
}

double GridSpec::wavenumber(int k) const {
  return 2.0 * pi * fft::frequency(k, n_points) / box_length;
}

ScalarField2D::ScalarField2D(const GridSpec& grid) : grid_(grid), values_(grid.size(), 0.0) {}

ScalarField2D::ScalarField2D(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  require(values_.size() == grid_.size(), "ScalarField2D: value count does not match grid");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      const auto n = static_cast<std::size_t>(grid_.n_points);
      throw InvalidInput("ScalarField2D: non-finite sample at (i=" + std::to_string(k % n) +
                         ", j=" + std::to_string(k / n) + ")");
    }
  }
}

ScalarField2D ScalarField2D::from_spectral(const GridSpec& grid, std::vector<Complex> coeffs) {
  std::vector<double> v(grid.size());
  fft::inverse(grid.n_points, grid.n_points, coeffs, v);
  ScalarField2D f(grid, std::move(v));
  std::call_once(f.cache_->once, [&] { f.cache_->coeffs = std::move(coeffs); });
  return f;
}

const std::vector<ScalarField2D::Complex>& ScalarField2D::spectral() const {
  std::call_once(cache_->once, [this] {
    cache_->coeffs.resize(grid_.spectral_size());
    fft::forward(grid_.n_points, grid_.n_points, values_, cache_->coeffs);
  });
  return cache_->coeffs;
}

double ScalarField2D::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

ScalarField2D& ScalarField2D::operator+=(const ScalarField2D& o) {
  require(o.grid_ == grid_, "ScalarField2D: grid mismatch");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  invalidate();
  return *this;
}

ScalarField2D& ScalarField2D::operator-=(const ScalarField2D& o) {
  require(o.grid_ == grid_, "ScalarField2D: grid mismatch");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  invalidate();
  return *this;
}

ScalarField2D& ScalarField2D::operator*=(double s) {
  for (double& v : values_) v *= s;
  invalidate();
  return *this;
}

double VectorField2D::max_norm() const {
  double m = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) m = std::max(m, std::hypot(u[k], v[k]));
  return m;
}

}  // namespace vlab
