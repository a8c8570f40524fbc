#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairaudit/model.hpp"
#include "fairaudit/stats.hpp"

namespace fairaudit {

// One score bin. Scores are probabilities of the unfavorable outcome; the
// counts theta_p / gamma_u are favorable outcomes.
struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  long alpha_p = 0;  // protected records in the bin
  long theta_p = 0;  // protected records with a favorable outcome
  long beta_u = 0;   // unprotected records in the bin
  long gamma_u = 0;  // unprotected records with a favorable outcome
  // Protected favorable rate rescaled to the unprotected bin population.
  std::optional<double> lambda;

  bool usable() const { return alpha_p > 0 && gamma_u > 0; }
};

struct CalibrationTable {
  std::vector<CalibrationBin> bins;
};

// Equal-width bins [i/k, (i+1)/k); the last bin also holds 1.0.
int bin_index(double score, int k);
CalibrationTable bin_scores(std::span<const PredictionRecord> records, int k);

// (theta / alpha) * beta; empty when alpha == 0.
std::optional<double> standardized_frequency(long theta, long alpha, long beta);

struct ChiSquareTest {
  TestResult result;
  int usable_bins = 0;
  // Per-bin contributions, 0 for excluded bins. Two entries per bin for the
  // well-calibration test (protected, unprotected).
  std::vector<double> terms;
  std::vector<std::string> notes;
};

// Sum over usable bins of (lambda - gamma)^2 / gamma with usable - 1 degrees
// of freedom, right tailed. Throws InsufficientDataError with < 2 usable bins.
ChiSquareTest calibration_chi2(const CalibrationTable& table, double alpha = 0.05);

// Expected favorable rate for a bin: the observed rate projected onto the
// bin's favorable-rate interval [1 - upper, 1 - lower]. Outside the interval
// this is the nearest edge; inside it the observation is its own expectation.
double expected_favorable_rate(double observed_rate, const CalibrationBin& bin);

// (protected term, unprotected term) of the well-calibration statistic for
// one usable bin; each term is (observed - expected)^2 / expected on the
// unprotected-population scale.
std::pair<double, double> well_calibration_terms(const CalibrationBin& bin);

// Two terms per usable bin, 2 * usable - 1 degrees of freedom, right tailed.
ChiSquareTest well_calibration_chi2(const CalibrationTable& table, double alpha = 0.05);

}  // namespace fairaudit
