#include "vlab/fit.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vlab/types.hpp"

namespace vlab {
namespace {

// Two-sided 97.5% Student t quantiles for 1..30 degrees of freedom.
double t975(std::size_t dof) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                 2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                 2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                 2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof == 0) return std::numeric_limits<double>::infinity();
  return dof <= 30 ? table[dof - 1] : 1.96;
}

}  // namespace

ScalingFit fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "fit: x and y differ in length");
  require(x.size() >= 2, "fit: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  require(sxx > 0.0, "fit: x values are all equal");
  ScalingFit f;
  f.points = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double e = y[k] - f.intercept - f.slope * x[k];
    sse += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  if (x.size() > 2) {
    f.slope_stderr = std::sqrt(sse / (n - 2.0) / sxx);
    f.slope_ci95 = t975(x.size() - 2) * f.slope_stderr;
  }
  return f;
}

ScalingFit fit_scaling(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "fit_scaling: x and y differ in length");
  require(x.size() >= 3, "fit_scaling: need at least three points");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x.size(); ++k) {
    require(x[k] > 0.0 && y[k] > 0.0,
            "fit_scaling: nonpositive value at index " + std::to_string(k));
    lx.push_back(std::log(x[k]));
    ly.push_back(std::log(y[k]));
  }
  return fit_line(lx, ly);
}

}  // namespace vlab
