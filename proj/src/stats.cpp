#include "fairaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fairaudit/errors.hpp"

namespace fairaudit {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for I_x(a, b), modified Lentz. Converges quickly for
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

// I_x(a, b) with y = 1 - x supplied separately so callers that know the
// complement accurately do not lose it to cancellation.
double ibeta(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log(y) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, y) / b;
}

// Upper tail of Student t for t >= 0: 0.5 * I_{df/(df+t^2)}(df/2, 1/2).
double t_upper_nonneg(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  return 0.5 * ibeta(0.5 * df, 0.5, x, y);
}

double gamma_series(double s, double x) {
  double sum = 1.0 / s;
  double term = sum;
  double ap = s;
  for (int n = 1; n <= kMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

double gamma_continued_fraction(double s, double x) {
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

}  // namespace

std::string_view to_string(Tail tail) {
  switch (tail) {
    case Tail::left: return "left";
    case Tail::right: return "right";
    case Tail::two_sided: return "two_sided";
  }
  return "two_sided";
}

Tail tail_from_string(std::string_view text) {
  if (text == "left") return Tail::left;
  if (text == "right") return Tail::right;
  if (text == "two_sided") return Tail::two_sided;
  throw ParseError("unknown tail '" + std::string(text) + "'", 0);
}

Tail opposite(Tail tail) {
  switch (tail) {
    case Tail::left: return Tail::right;
    case Tail::right: return Tail::left;
    case Tail::two_sided: return Tail::two_sided;
  }
  return Tail::two_sided;
}

double incomplete_beta(double a, double b, double x) {
  return ibeta(a, b, x, 1.0 - x);
}

double gamma_p(double s, double x) {
  if (x <= 0.0) return 0.0;
  if (x < s + 1.0) return gamma_series(s, x);
  return 1.0 - gamma_continued_fraction(s, x);
}

double gamma_q(double s, double x) {
  if (x <= 0.0) return 1.0;
  if (x < s + 1.0) return 1.0 - gamma_series(s, x);
  return gamma_continued_fraction(s, x);
}

double t_sf(double t, double df) {
  if (t == 0.0) return 0.5;
  if (t > 0.0) return t_upper_nonneg(t, df);
  return 1.0 - t_upper_nonneg(-t, df);
}

double t_tail_p(double t, double df, Tail tail) {
  switch (tail) {
    case Tail::right: return t_sf(t, df);
    case Tail::left: return t_sf(-t, df);
    case Tail::two_sided: return std::min(1.0, 2.0 * t_sf(std::fabs(t), df));
  }
  return 1.0;
}

double chi2_sf(double x, int k_df) {
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * k_df, 0.5 * x);
}

WelchSummary summarize(std::span<const double> a, std::span<const double> b) {
  auto moments = [](std::span<const double> s) {
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(s.size());
    double ss = 0.0;
    for (double v : s) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / static_cast<double>(s.size() - 1)};
  };
  const auto [mean_a, var_a] = moments(a);
  const auto [mean_b, var_b] = moments(b);
  return {mean_a, mean_b, var_a, var_b, a.size(), b.size()};
}

TestResult welch_t(std::span<const double> a, std::span<const double> b, Tail tail,
                   double alpha) {
  if (a.size() < 2 || b.size() < 2) {
    throw InsufficientDataError("welch_t needs at least 2 observations per sample (got " +
                                std::to_string(a.size()) + " and " +
                                std::to_string(b.size()) + ")");
  }
  const WelchSummary s = summarize(a, b);
  const double na = static_cast<double>(s.n_a);
  const double nb = static_cast<double>(s.n_b);
  const double ra = s.var_a / na;
  const double rb = s.var_b / nb;
  const double se2 = ra + rb;

  TestResult r;
  r.tail = tail;
  r.alpha = alpha;
  const double diff = s.mean_a - s.mean_b;
  if (se2 == 0.0) {
    r.degenerate = true;
    r.df = na + nb - 2.0;
    if (diff == 0.0) {
      r.statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.statistic = diff > 0 ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity();
      r.p_value = t_tail_p(r.statistic, r.df, tail);
    }
    return r;
  }
  r.statistic = diff / std::sqrt(se2);
  r.df = se2 * se2 / (ra * ra / (na - 1.0) + rb * rb / (nb - 1.0));
  r.p_value = t_tail_p(r.statistic, r.df, tail);
  return r;
}

double binomial_midp(std::int64_t k, std::int64_t n) {
  if (n < 0 || k < 0 || k > n) {
    throw ConfigError("binomial_midp requires 0 <= k <= n (got k=" + std::to_string(k) +
                      ", n=" + std::to_string(n) + ")");
  }
  if (n == 0) return 1.0;
  const std::int64_t ks = std::min(k, n - k);
  const long double nn = static_cast<long double>(n);
  const long double kk = static_cast<long double>(ks);
  const long double log_pmf = std::lgamma(nn + 1.0L) - std::lgamma(kk + 1.0L) -
                              std::lgamma(nn - kk + 1.0L) -
                              nn * std::numbers::ln2_v<long double>;
  // Sum pmf(i)/pmf(k*) for i = k*, k*-1, ..., 0; the ratios shrink
  // geometrically because k* <= n/2.
  long double ratio = 1.0L;
  long double total = 1.0L;
  for (std::int64_t i = ks; i > 0; --i) {
    ratio *= static_cast<long double>(i) / static_cast<long double>(n - i + 1);
    total += ratio;
    if (ratio < total * 1e-22L) break;
  }
  const long double p = std::exp(log_pmf) * (2.0L * total - 1.0L);
  return std::clamp(static_cast<double>(p), 0.0, 1.0);
}

double bonferroni(double alpha, int m) {
  if (m < 1 || !(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("bonferroni requires alpha in (0,1) and m >= 1");
  }
  return alpha / m;
}

}  // namespace fairaudit
