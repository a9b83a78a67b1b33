#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rmstmatch/dataset.hpp"
#include "rmstmatch/matcher.hpp"

namespace rmstmatch {

struct PropensityFit {
  std::vector<double> coefficients; // intercept first, then one per covariate
  std::vector<double> std_errors;   // from the inverse Fisher information
  std::vector<double> scores;       // e(X), strictly inside (0,1)
  int iterations = 0;
  bool converged = false;
  double max_abs_score_gradient = 0.0;
  double log_likelihood = 0.0;
};

struct IrlsOptions {
  double tolerance = 1e-8; // on the max absolute log-likelihood gradient
  int max_iterations = 50;
};

// Maximum-likelihood logistic regression of a on X (row-major n x p, no
// intercept column) by iteratively reweighted least squares with step
// halving. No regularization: separation surfaces as an error.
// Throws rank_deficient, separation, not_converged.
PropensityFit fit_logistic(std::span<const double> x, std::size_t n, std::size_t p,
                           std::span<const std::uint8_t> a, const IrlsOptions& options = {});

PropensityFit fit_logistic(const Dataset& dataset, const IrlsOptions& options = {});

struct BalanceRow {
  std::string name;
  double smd_before = 0.0;
  double smd_after = 0.0; // NaN when no matched pairs were supplied
};

// Standardized mean differences per covariate. The pooled-SD denominator
// sqrt((s_t^2 + s_c^2)/2) is computed on the full sample and reused for the
// post-matching column so both share a scale. `pairs` indexes positions in
// treated_indices() / control_indices() order.
// Throws zero_variance when a covariate's pooled SD is zero.
std::vector<BalanceRow> standardized_mean_differences(const Dataset& dataset,
                                                      const MatchedPairs* pairs = nullptr);

double max_abs_smd_after(const std::vector<BalanceRow>& table);

} // namespace rmstmatch
