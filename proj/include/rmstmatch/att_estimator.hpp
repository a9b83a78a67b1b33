#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rmstmatch/dataset.hpp"
#include "rmstmatch/km_rmst.hpp"
#include "rmstmatch/matcher.hpp"
#include "rmstmatch/paired_cov.hpp"

namespace rmstmatch {

// marginal-variance method; the covariance term is always the paired
// counting-process estimate
enum class VarianceMethod { murray, hosmer };

std::string to_string(VarianceMethod method);
VarianceMethod variance_method_from_string(const std::string& name);

struct AttResult {
  double estimate = 0.0; // mu1(tau) - mu0(tau) on the matched sample
  double se = 0.0;
  double ci_low = 0.0, ci_high = 0.0;
  double var0 = 0.0, var1 = 0.0, cov = 0.0;
  double rmst0 = 0.0, rmst1 = 0.0; // per-arm restricted means (m0, m1)
  double tau = 0.0;
  std::size_t n_pairs = 0;
  VarianceMethod variance_method = VarianceMethod::murray;
};

struct AttOptions {
  VarianceMethod variance_method = VarianceMethod::murray;
  TailPairing tail_pairing = TailPairing::derived;
  double z = 1.959963984540054; // 97.5% normal quantile
};

// Aligns the matched subjects pairwise: arm 0 = controls, arm 1 = treated.
// `pairs` indexes positions in treated_indices() / control_indices() order.
PairedSample matched_paired_sample(const Dataset& dataset, const MatchedPairs& pairs);

// Matched ATT RMST difference: per-arm Kaplan-Meier curves over matched
// subjects only, se = sqrt(var0 + var1 - 2 cov) with the paired covariance.
AttResult matched_rmst_att(const Dataset& dataset, const MatchedPairs& pairs, double tau,
                           const AttOptions& options = {});

struct IptwResult {
  double estimate = 0.0; // point estimate only
  double rmst0 = 0.0, rmst1 = 0.0;
  double max_control_weight = 0.0;
  bool extreme_weights = false; // any control weight > 100; flagged, not fatal
};

// IPTW-adjusted Kaplan-Meier comparator with ATT weights: treated weight 1,
// control weight e/(1-e).
IptwResult iptw_km_rmst_att(const Dataset& dataset, std::span<const double> scores, double tau);

struct PerformanceSummary {
  std::size_t n_replicates = 0;
  double truth = 0.0;
  double mean_estimate = 0.0;
  double bias = 0.0;     // mean(estimates) - truth
  double bias_pct = 0.0; // bias / truth * 100; NaN when truth == 0
  double coverage = 0.0; // fraction of CIs covering truth; NaN without CIs
  double sem = 0.0;      // mean model-based SE; NaN without SEs
  double see = 0.0;      // sd of the point estimates
};

// Monte Carlo summary across replicates. ses / ci bounds may be empty (point
// estimate only); then coverage and sem are NaN.
PerformanceSummary summarize_replicates(std::span<const double> estimates,
                                        std::span<const double> ses,
                                        std::span<const double> ci_low,
                                        std::span<const double> ci_high, double truth);

} // namespace rmstmatch
