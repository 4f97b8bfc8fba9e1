#pragma once

#include <span>
#include <vector>

namespace rshape::stats {

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double stddev(std::span<const double> xs);
double std_error(std::span<const double> xs);
double median(std::vector<double> xs);

struct AnovaResult {
  double f = 0.0;
  double df_between = 0.0;
  double df_within = 0.0;
  double p = 1.0;
  bool degenerate = false;  // no within-group variance at all
};

/// One-way ANOVA across groups (each needs >= 2 values).
AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
  bool degenerate = false;
};

/// Welch's unequal-variance t test.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Holm-Bonferroni step-down adjustment; output order matches input.
std::vector<double> holm_adjust(const std::vector<double>& p);

struct SignTestResult {
  int wins = 0;    // pairs with first < second
  int losses = 0;  // pairs with first > second
  int ties = 0;
  double p = 1.0;  // one-sided, H1: first tends to be smaller
};

/// Paired sign test over (first[i], second[i]); ties are dropped.
SignTestResult sign_test_less(std::span<const double> first, std::span<const double> second);

}  // namespace rshape::stats
