#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmstmatch/att_estimator.hpp"
#include "rmstmatch/dataset.hpp"
#include "rmstmatch/matcher.hpp"
#include "rmstmatch/propensity.hpp"
#include "rmstmatch/sim_engine.hpp"

namespace rmstmatch {

struct AnalysisOptions {
  DistanceMetric metric = DistanceMetric::logit;
  VarianceMethod variance_method = VarianceMethod::murray;
  TailPairing tail_pairing = TailPairing::derived;
  bool with_iptw = false;
};

// Everything one pass over a dataset produces: propensity fit, matched
// pairs, balance table, the matched ATT estimate, and optionally the IPTW
// comparator.
struct AnalysisResult {
  PropensityFit fit;
  MatchedPairs pairs;
  std::vector<BalanceRow> balance;
  AttResult att;
  std::optional<IptwResult> iptw;
};

// fit propensity -> optimal 1:1 match -> balance -> matched RMST difference
AnalysisResult analyze_dataset(const Dataset& dataset, double tau,
                               const AnalysisOptions& options = {});

struct StudyConfig {
  ScenarioConfig scenario;
  std::size_t replicates = 500;
  unsigned threads = 0;            // 0 = hardware concurrency
  double max_failure_rate = 0.02;  // abort past this fraction of failed reps
  AnalysisOptions analysis{.with_iptw = true};
};

struct ReplicateRecord {
  std::size_t id = 0;
  bool ok = false;
  std::string error;
  double true_att = 0.0;
  double matched_estimate = 0.0;
  double matched_se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double iptw_estimate = 0.0;
  std::size_t n_pairs = 0;
};

struct StudyResult {
  std::vector<ReplicateRecord> replicates; // sorted by id, failures included
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  double truth = 0.0; // mean per-replicate true ATT over successful reps
  PerformanceSummary matched;
  PerformanceSummary iptw; // point estimates only: coverage/sem are NaN
};

// Runs `replicates` independent draws of the scenario through the full
// matched pipeline plus the IPTW comparator. Replicate r uses the stream
// derived from (scenario.seed, r), so results are reproducible and
// order-independent under any thread count. Throws numeric_error when the
// failure rate exceeds max_failure_rate.
StudyResult run_study(const StudyConfig& config);

} // namespace rmstmatch
