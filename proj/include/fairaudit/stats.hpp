#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace fairaudit {

enum class Tail { left, right, two_sided };

std::string_view to_string(Tail tail);
Tail tail_from_string(std::string_view text);
Tail opposite(Tail tail);

struct TestResult {
  double statistic = 0.0;
  double df = 0.0;
  Tail tail = Tail::two_sided;
  double p_value = 1.0;
  double alpha = 0.05;
  // Set when the inputs carry no information (zero variance in both samples,
  // no discordant pairs, ...). p_value then follows the documented fallback.
  bool degenerate = false;

  bool significant() const { return p_value < alpha; }
};

// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
double incomplete_beta(double a, double b, double x);

// Regularized lower and upper incomplete gamma P(s, x), Q(s, x).
double gamma_p(double s, double x);
double gamma_q(double s, double x);

// Student-t survival function P(T >= t) for df > 0.
double t_sf(double t, double df);

// Student-t tail probability for the given direction:
//   right: P(T >= t), left: P(T <= t), two_sided: 2 P(T >= |t|).
double t_tail_p(double t, double df, Tail tail);

// Chi-squared survival function P(X >= x) with k_df degrees of freedom.
double chi2_sf(double x, int k_df);

struct WelchSummary {
  double mean_a, mean_b;
  double var_a, var_b;  // unbiased sample variances
  std::size_t n_a, n_b;
};

WelchSummary summarize(std::span<const double> a, std::span<const double> b);

// Two-sample t-test with unequal variances. The statistic has the sign of
// mean(a) - mean(b); df from the Welch-Satterthwaite equation.
// Throws InsufficientDataError when either sample has fewer than 2 entries.
TestResult welch_t(std::span<const double> a, std::span<const double> b, Tail tail,
                   double alpha = 0.05);

// Exact two-sided binomial mid-p value for k successes in n fair trials:
//   2 * P(X <= k*) - P(X = k*),  k* = min(k, n - k), clamped to [0, 1].
// Evaluated in log space; no normal approximation. n = 0 returns 1.
double binomial_midp(std::int64_t k, std::int64_t n);

double bonferroni(double alpha, int m);

}  // namespace fairaudit
