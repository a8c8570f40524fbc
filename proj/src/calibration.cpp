#include "fairaudit/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fairaudit/errors.hpp"

namespace fairaudit {

namespace {

std::string bin_label(const CalibrationBin& bin) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "[%.3g, %.3g)", bin.lower, bin.upper);
  return buf;
}

int count_usable(const CalibrationTable& table, std::vector<std::string>& notes) {
  int usable = 0;
  for (const auto& bin : table.bins) {
    if (bin.usable()) {
      ++usable;
    } else if (bin.alpha_p > 0 || bin.beta_u > 0) {
      notes.push_back("bin " + bin_label(bin) + " excluded: " +
                      (bin.alpha_p == 0 ? "no protected records"
                                        : "no favorable unprotected outcomes"));
    }
  }
  return usable;
}

// Observed minus expected, squared, over expected, on a population of size
// `population`, computed in rate space so in-bin rates give exactly 0.
double rate_term(double observed_rate, double expected_rate, long population) {
  const double d = observed_rate - expected_rate;
  if (d == 0.0) return 0.0;
  return static_cast<double>(population) * d * d / expected_rate;
}

}  // namespace

int bin_index(double score, int k) {
  const int i = static_cast<int>(std::floor(score * k));
  return std::clamp(i, 0, k - 1);
}

CalibrationTable bin_scores(std::span<const PredictionRecord> records, int k) {
  if (k < 2) throw ConfigError("calibration needs at least 2 bins");
  CalibrationTable table;
  for (int i = 0; i < k; ++i) {
    CalibrationBin bin;
    bin.lower = static_cast<double>(i) / k;
    bin.upper = static_cast<double>(i + 1) / k;
    table.bins.push_back(bin);
  }
  for (const auto& r : records) {
    auto& bin = table.bins[static_cast<std::size_t>(bin_index(r.score, k))];
    const bool favorable = r.y_true == kFavorable;
    if (r.group == Group::protected_group) {
      ++bin.alpha_p;
      if (favorable) ++bin.theta_p;
    } else {
      ++bin.beta_u;
      if (favorable) ++bin.gamma_u;
    }
  }
  for (auto& bin : table.bins) {
    bin.lambda = standardized_frequency(bin.theta_p, bin.alpha_p, bin.beta_u);
  }
  return table;
}

std::optional<double> standardized_frequency(long theta, long alpha, long beta) {
  if (alpha <= 0) return std::nullopt;
  // theta * beta is exact for realistic counts, so alpha == beta returns theta.
  return static_cast<double>(theta) * static_cast<double>(beta) / static_cast<double>(alpha);
}

ChiSquareTest calibration_chi2(const CalibrationTable& table, double alpha) {
  ChiSquareTest out;
  out.usable_bins = count_usable(table, out.notes);
  if (out.usable_bins < 2) {
    throw InsufficientDataError("calibration test needs at least 2 usable bins, found " +
                                std::to_string(out.usable_bins));
  }
  double statistic = 0.0;
  for (const auto& bin : table.bins) {
    double term = 0.0;
    if (bin.usable()) {
      const double gamma = static_cast<double>(bin.gamma_u);
      const double diff = *bin.lambda - gamma;
      term = diff * diff / gamma;
    }
    out.terms.push_back(term);
    statistic += term;
  }
  out.result.statistic = statistic;
  out.result.df = out.usable_bins - 1;
  out.result.tail = Tail::right;
  out.result.alpha = alpha;
  out.result.p_value = chi2_sf(statistic, out.usable_bins - 1);
  return out;
}

double expected_favorable_rate(double observed_rate, const CalibrationBin& bin) {
  return std::clamp(observed_rate, 1.0 - bin.upper, 1.0 - bin.lower);
}

std::pair<double, double> well_calibration_terms(const CalibrationBin& bin) {
  if (!bin.usable()) throw InsufficientDataError("bin " + bin_label(bin) + " is not usable");
  const double rate_p = static_cast<double>(bin.theta_p) / static_cast<double>(bin.alpha_p);
  const double rate_u = static_cast<double>(bin.gamma_u) / static_cast<double>(bin.beta_u);
  return {rate_term(rate_p, expected_favorable_rate(rate_p, bin), bin.beta_u),
          rate_term(rate_u, expected_favorable_rate(rate_u, bin), bin.beta_u)};
}

ChiSquareTest well_calibration_chi2(const CalibrationTable& table, double alpha) {
  ChiSquareTest out;
  out.usable_bins = count_usable(table, out.notes);
  if (out.usable_bins < 2) {
    throw InsufficientDataError("well-calibration test needs at least 2 usable bins, found " +
                                std::to_string(out.usable_bins));
  }
  double statistic = 0.0;
  for (const auto& bin : table.bins) {
    auto [tp, tu] = bin.usable() ? well_calibration_terms(bin) : std::pair{0.0, 0.0};
    out.terms.push_back(tp);
    out.terms.push_back(tu);
    statistic += tp + tu;
  }
  out.result.statistic = statistic;
  out.result.df = 2 * out.usable_bins - 1;
  out.result.tail = Tail::right;
  out.result.alpha = alpha;
  out.result.p_value = chi2_sf(statistic, 2 * out.usable_bins - 1);
  return out;
}

}  // namespace fairaudit
