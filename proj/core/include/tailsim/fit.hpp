#pragma once

#include <span>
#include <utility>

namespace tailsim {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;  // 1 - SS_res/SS_tot; 0 when the ordinates are constant
};

// Ordinary least squares of y on x. Throws DegenerateInput with fewer than two
// distinct abscissae.
LinearFit linear_fit(std::span<const std::pair<double, double>> points);

// Spearman rank correlation (average ranks for ties).
double rank_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace tailsim
