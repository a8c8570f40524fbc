#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "fairaudit/data.hpp"

namespace fairaudit {

struct SynthConfig {
  std::size_t n = 5000;
  std::size_t d = 5;
  // Feature coefficients of the outcome logit; empty selects the defaults
  // 0.8, -0.6, 0.4, -0.2, 0.1, 0.8, ... cycled to length d.
  std::vector<double> coefficients;
  double intercept = 0.0;
  // Added to the logit of the unfavorable outcome for protected rows.
  double group_shift = 0.0;
  // Probability that a row is protected.
  double group_mix = 0.5;
  std::uint64_t seed = 0;
};

// Standard-normal features x0..x{d-1}; the outcome is unfavorable with
// probability sigmoid(intercept + coefficients . x + group_shift * [protected]).
// Row ids are 0..n-1. Deterministic per seed.
Dataset generate(const SynthConfig& config);

enum class BiasMechanism { outcome_shift, label_noise_on_protected };

BiasMechanism bias_mechanism_from_string(std::string_view name);

// outcome_shift: each protected favorable outcome becomes unfavorable with
// probability `magnitude`. label_noise_on_protected: each protected outcome
// is flipped with probability `magnitude`. Magnitude must lie in [0, 1];
// 0 returns the dataset unchanged.
Dataset inject_bias(const Dataset& dataset, BiasMechanism mechanism, double magnitude,
                    std::uint64_t seed);

// Schema matching write_dataset_csv output for a generated dataset.
Schema synth_schema(const Dataset& dataset);

}  // namespace fairaudit
