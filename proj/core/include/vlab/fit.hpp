#pragma once

#include <span>

namespace vlab {

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;  // log y at log x = 0
  double r2 = 0.0;
  double slope_stderr = 0.0;
  // Half-width of the 95% confidence interval on the slope (Student t).
  double slope_ci95 = 0.0;
  std::size_t points = 0;
};

// Ordinary least squares of log y on log x. Needs >= 3 points, all positive.
ScalingFit fit_scaling(std::span<const double> x, std::span<const double> y);

// Ordinary least squares of y on x (no logarithms). Needs >= 2 points.
ScalingFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace vlab
