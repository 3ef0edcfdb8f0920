#pragma once

#include <cstddef>
#include <vector>

namespace deskrl {

double mean(const std::vector<double>& xs);
/// Sample variance with the n-1 denominator.
double sample_variance(const std::vector<double>& xs);

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Regularized lower incomplete gamma P(a, x).
double incomplete_gamma_p(double a, double x);

/// Two-sided p-value of a t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// Upper tail probability of a chi-square statistic with k degrees of freedom.
double chi_square_sf(double x, double k);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  bool degenerate = false;  // both samples had zero variance
};

/// Welch's unequal-variance two-sample t-test, two-sided. Requires at
/// least two observations per sample.
WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

/// Pearson chi-square goodness-of-fit p-value against uniform expected
/// counts. Used by the stochasticity test suites.
double chi_square_uniform_p(const std::vector<std::size_t>& counts);

}  // namespace deskrl
